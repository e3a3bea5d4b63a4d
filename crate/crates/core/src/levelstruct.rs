//! Level structures of type P, B, T on the symplectic module (ℤ/nℤ)^{2g}.
//!
//! Subgroups are stored as the sorted list of all their element codes, so
//! equality of structures is syntactic.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::finalg::ModMatrix;
use crate::sympgrp::{pairing, require_prime, sp_generators, SymplecticElement};
use crate::weyl::{matrix_lift, sign_vectors, subgroup_generated, GeneratorSet, WeylElement};

/// `(ℤ/nℤ)^{2g}` with the standard alternating pairing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SympModule {
    n: u32,
    g: usize,
}

impl SympModule {
    pub fn new(g: usize, n: u32) -> Result<Self> {
        if g == 0 || n < 2 || (n as f64).powi(2 * g as i32) > 1e15 {
            return Err(Error::InvalidParameter(format!("module (Z/{n})^{}", 2 * g)));
        }
        Ok(Self { n, g })
    }

    pub fn genus(&self) -> usize {
        self.g
    }

    pub fn modulus(&self) -> u32 {
        self.n
    }

    pub fn dim(&self) -> usize {
        2 * self.g
    }

    pub fn encode(&self, x: &[u32]) -> u64 {
        x.iter()
            .rev()
            .fold(0, |acc, &v| acc * self.n as u64 + (v % self.n) as u64)
    }

    pub fn decode(&self, mut c: u64) -> Vec<u32> {
        (0..self.dim())
            .map(|_| {
                let d = (c % self.n as u64) as u32;
                c /= self.n as u64;
                d
            })
            .collect()
    }

    pub fn pairing(&self, x: &[u32], y: &[u32]) -> u32 {
        pairing(self.g, self.n, x, y)
    }

    pub fn pairing_codes(&self, a: u64, b: u64) -> u32 {
        self.pairing(&self.decode(a), &self.decode(b))
    }

    pub fn basis_vector(&self, i: usize) -> Vec<u32> {
        let mut v = vec![0; self.dim()];
        v[i] = 1;
        v
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        let (x, y) = (self.decode(a), self.decode(b));
        let s: Vec<u32> = x.iter().zip(&y).map(|(p, q)| (p + q) % self.n).collect();
        self.encode(&s)
    }

    /// The subgroup generated by `gens`.
    pub fn span(&self, gens: &[Vec<u32>]) -> Subgroup {
        let codes: Vec<u64> = gens.iter().map(|v| self.encode(v)).collect();
        self.span_codes(&codes)
    }

    pub fn span_codes(&self, gens: &[u64]) -> Subgroup {
        let mut seen = BTreeSet::from([0u64]);
        let mut queue = VecDeque::from([0u64]);
        while let Some(x) = queue.pop_front() {
            for &s in gens {
                let y = self.add(x, s);
                if seen.insert(y) {
                    queue.push_back(y);
                }
            }
        }
        Subgroup {
            elems: seen.into_iter().collect(),
        }
    }

    pub fn sum(&self, a: &Subgroup, b: &Subgroup) -> Subgroup {
        let mut out = BTreeSet::new();
        for &x in &a.elems {
            for &y in &b.elems {
                out.insert(self.add(x, y));
            }
        }
        Subgroup {
            elems: out.into_iter().collect(),
        }
    }

    pub fn image(&self, m: &ModMatrix, h: &Subgroup) -> Subgroup {
        let mut elems: Vec<u64> = h
            .elems
            .iter()
            .map(|&c| self.encode(&m.mul_vec(&self.decode(c))))
            .collect();
        elems.sort_unstable();
        elems.dedup();
        Subgroup { elems }
    }

    /// Greedy generating set in increasing code order; canonical for the subgroup.
    pub fn generators(&self, h: &Subgroup) -> Vec<u64> {
        let mut gens = Vec::new();
        let mut span = self.span_codes(&[]);
        for &c in &h.elems {
            if !span.contains(c) {
                gens.push(c);
                span = self.span_codes(&gens);
            }
        }
        gens
    }

    pub fn is_isotropic(&self, h: &Subgroup) -> bool {
        let gens = self.generators(h);
        gens.iter()
            .all(|&x| gens.iter().all(|&y| self.pairing_codes(x, y) == 0))
    }

    /// Nonzero vectors with first nonzero coordinate 1: one per line over F_p.
    fn line_generators(&self) -> Vec<u64> {
        let total = (self.n as u64).pow(self.dim() as u32);
        (1..total)
            .filter(|&c| self.decode(c).into_iter().find(|&x| x != 0) == Some(1))
            .collect()
    }
}

/// A subgroup of `(ℤ/nℤ)^{2g}`, stored as its sorted element codes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subgroup {
    elems: Vec<u64>,
}

impl Subgroup {
    pub fn order(&self) -> usize {
        self.elems.len()
    }

    pub fn elements(&self) -> &[u64] {
        &self.elems
    }

    pub fn contains(&self, code: u64) -> bool {
        self.elems.binary_search(&code).is_ok()
    }

    pub fn is_subgroup_of(&self, other: &Self) -> bool {
        self.elems.iter().all(|&c| other.contains(c))
    }

    pub fn is_trivial(&self) -> bool {
        self.elems.len() == 1
    }

    pub fn intersect(&self, other: &Self) -> Self {
        Self {
            elems: self
                .elems
                .iter()
                .copied()
                .filter(|&c| other.contains(c))
                .collect(),
        }
    }
}

/// Totally isotropic subgroup of order n^g.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PLevel {
    pub h: Subgroup,
}

/// Flag `H_1 ⊂ … ⊂ H_g`, `|H_i| = n^i`, `H_g` totally isotropic.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BLevel {
    pub flag: Vec<Subgroup>,
}

/// Lines `H_1, …, H_{2g}` with `H_i ⊕ H_{g+i}` hyperbolic.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TLevel {
    pub lines: Vec<Subgroup>,
}

/// The steps `H_j` of a flag with `s_j ∉ I`, as `(j, H_j)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartialFlag {
    pub i_set: Vec<usize>,
    pub steps: Vec<(usize, Subgroup)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StructureKind {
    P,
    B,
    T,
    /// `P_I`-level, `I` a set of 1-based simple reflection indices
    Parabolic(Vec<usize>),
}

impl StructureKind {
    /// `P_{I_k}`, reported as `B` for k = 0 and `P` for k = g − 1.
    pub fn nested(g: usize, k: usize) -> Self {
        if k == 0 {
            Self::B
        } else if k + 1 == g {
            Self::P
        } else {
            Self::Parabolic(GeneratorSet::new(g).nested(k))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LevelStructure {
    P(PLevel),
    B(BLevel),
    T(TLevel),
    Parabolic(PartialFlag),
}

impl LevelStructure {
    pub fn kind(&self) -> StructureKind {
        match self {
            Self::P(_) => StructureKind::P,
            Self::B(_) => StructureKind::B,
            Self::T(_) => StructureKind::T,
            Self::Parabolic(f) => StructureKind::Parabolic(f.i_set.clone()),
        }
    }

    fn subgroups(&self) -> Vec<&Subgroup> {
        match self {
            Self::P(p) => vec![&p.h],
            Self::B(b) => b.flag.iter().collect(),
            Self::T(t) => t.lines.iter().collect(),
            Self::Parabolic(f) => f.steps.iter().map(|(_, h)| h).collect(),
        }
    }

    fn map_subgroups(&self, mut f: impl FnMut(&Subgroup) -> Subgroup) -> Self {
        match self {
            Self::P(p) => Self::P(PLevel { h: f(&p.h) }),
            Self::B(b) => Self::B(BLevel {
                flag: b.flag.iter().map(&mut f).collect(),
            }),
            Self::T(t) => Self::T(TLevel {
                lines: t.lines.iter().map(&mut f).collect(),
            }),
            Self::Parabolic(pf) => Self::Parabolic(PartialFlag {
                i_set: pf.i_set.clone(),
                steps: pf.steps.iter().map(|(j, h)| (*j, f(h))).collect(),
            }),
        }
    }

    /// Checks the defining conditions of the structure's kind.
    pub fn is_valid(&self, module: &SympModule) -> bool {
        let n = module.modulus() as usize;
        let g = module.genus();
        match self {
            Self::P(p) => p.h.order() == n.pow(g as u32) && module.is_isotropic(&p.h),
            Self::B(b) => {
                b.flag.len() == g
                    && b.flag
                        .iter()
                        .enumerate()
                        .all(|(i, h)| h.order() == n.pow(i as u32 + 1))
                    && b.flag.windows(2).all(|w| w[0].is_subgroup_of(&w[1]))
                    && module.is_isotropic(&b.flag[g - 1])
            }
            Self::T(t) => is_valid_t(module, &t.lines),
            Self::Parabolic(pf) => {
                pf.steps.windows(2).all(|w| w[0].1.is_subgroup_of(&w[1].1))
                    && pf
                        .steps
                        .iter()
                        .all(|(j, h)| h.order() == n.pow(*j as u32) && module.is_isotropic(h))
            }
        }
    }

    /// Canonical generators of each component, one CSV row per component.
    pub fn to_csv_rows(&self, module: &SympModule) -> Vec<String> {
        self.subgroups()
            .iter()
            .enumerate()
            .map(|(i, h)| {
                let gens: Vec<String> = module
                    .generators(h)
                    .into_iter()
                    .map(|c| {
                        module
                            .decode(c)
                            .iter()
                            .map(u32::to_string)
                            .collect::<Vec<_>>()
                            .join(" ")
                    })
                    .collect();
                format!("{i},{}", gens.join(";"))
            })
            .collect()
    }
}

fn is_valid_t(module: &SympModule, lines: &[Subgroup]) -> bool {
    let g = module.genus();
    let n = module.modulus() as usize;
    if lines.len() != 2 * g || lines.iter().any(|l| l.order() != n) {
        return false;
    }
    let gens: Vec<u64> = lines
        .iter()
        .map(|l| *module.generators(l).first().unwrap_or(&0))
        .collect();
    for i in 0..2 * g {
        for j in 0..2 * g {
            let v = module.pairing_codes(gens[i], gens[j]);
            let partner = if i < g { i + g } else { i - g };
            if j == partner {
                // hyperbolic: the pairing restricted to H_i ⊕ H_{g+i} is unimodular
                if crate::finalg::inv_mod(v, module.modulus()).is_none() {
                    return false;
                }
            } else if v != 0 {
                return false;
            }
        }
    }
    true
}

pub fn standard_structure(module: &SympModule, kind: &StructureKind) -> LevelStructure {
    let g = module.genus();
    let lines: Vec<Subgroup> = (0..2 * g)
        .map(|i| module.span(&[module.basis_vector(i)]))
        .collect();
    let t = LevelStructure::T(TLevel { lines });
    project(module, &t, kind).expect("T projects to every kind")
}

/// `act(γ, s)`: componentwise image.
pub fn act(module: &SympModule, gamma: &ModMatrix, s: &LevelStructure) -> LevelStructure {
    s.map_subgroups(|h| module.image(gamma, h))
}

fn flag_of_lines(module: &SympModule, lines: &[Subgroup]) -> Vec<Subgroup> {
    let g = module.genus();
    let mut flag = Vec::with_capacity(g);
    let mut acc = lines[0].clone();
    flag.push(acc.clone());
    for line in &lines[1..g] {
        acc = module.sum(&acc, line);
        flag.push(acc.clone());
    }
    flag
}

fn restrict_flag(flag: &[Subgroup], i_set: &[usize]) -> PartialFlag {
    let steps = (1..=flag.len())
        .filter(|j| !i_set.contains(j))
        .map(|j| (j, flag[j - 1].clone()))
        .collect();
    PartialFlag {
        i_set: i_set.to_vec(),
        steps,
    }
}

/// Forgetful map to a coarser kind.
pub fn project(
    module: &SympModule,
    s: &LevelStructure,
    target: &StructureKind,
) -> Result<LevelStructure> {
    let g = module.genus();
    let siegel = GeneratorSet::new(g).siegel();
    let incompatible = || Error::IncompatibleKinds(format!("{:?} -> {target:?}", s.kind()));
    let flag = match s {
        LevelStructure::T(t) => {
            if *target == StructureKind::T {
                return Ok(s.clone());
            }
            flag_of_lines(module, &t.lines)
        }
        LevelStructure::B(b) => b.flag.clone(),
        LevelStructure::P(p) => {
            return match target {
                StructureKind::P => Ok(s.clone()),
                StructureKind::Parabolic(i) if *i == siegel => {
                    Ok(LevelStructure::Parabolic(PartialFlag {
                        i_set: i.clone(),
                        steps: vec![(g, p.h.clone())],
                    }))
                }
                _ => Err(incompatible()),
            };
        }
        LevelStructure::Parabolic(pf) => {
            let kept = |i: &[usize]| pf.i_set.iter().all(|x| i.contains(x));
            return match target {
                StructureKind::P if kept(&siegel) => Ok(LevelStructure::P(PLevel {
                    h: pf.steps.last().expect("H_g kept").1.clone(),
                })),
                StructureKind::Parabolic(i) if kept(i) => {
                    Ok(LevelStructure::Parabolic(PartialFlag {
                        i_set: i.clone(),
                        steps: pf
                            .steps
                            .iter()
                            .filter(|(j, _)| !i.contains(j))
                            .cloned()
                            .collect(),
                    }))
                }
                _ => Err(incompatible()),
            };
        }
    };
    match target {
        StructureKind::T => Err(incompatible()),
        StructureKind::B => Ok(LevelStructure::B(BLevel { flag })),
        StructureKind::P => Ok(LevelStructure::P(PLevel {
            h: flag[g - 1].clone(),
        })),
        StructureKind::Parabolic(i) => Ok(LevelStructure::Parabolic(restrict_flag(&flag, i))),
    }
}

/// `v^σ`: the T-level `γ·lift(σ)⁻¹·t_std` for `t = γ·t_std`, realized as a
/// relabeling of lines; it is a left action of W.
pub fn weyl_twist(sigma: &WeylElement, t: &TLevel) -> TLevel {
    let g = sigma.genus();
    let tau = sigma.inverse();
    let mut lines = t.lines.clone();
    for i in 0..g {
        let j = tau.perm()[i];
        let (a, b) = if tau.flips()[i] {
            (g + j, j)
        } else {
            (j, g + j)
        };
        lines[i] = t.lines[a].clone();
        lines[g + i] = t.lines[b].clone();
    }
    TLevel { lines }
}

fn isotropic_flags(module: &SympModule, lines: &[u64]) -> Vec<Vec<Subgroup>> {
    let g = module.genus();
    let mut level: BTreeSet<Vec<Subgroup>> = BTreeSet::from([vec![]]);
    let zero = module.span_codes(&[]);
    for _ in 0..g {
        let mut next = BTreeSet::new();
        for flag in &level {
            let top = flag.last().unwrap_or(&zero);
            let gens = module.generators(top);
            for &v in lines {
                if top.contains(v) || gens.iter().any(|&x| module.pairing_codes(x, v) != 0) {
                    continue;
                }
                let mut f = flag.clone();
                f.push(module.sum(top, &module.span_codes(&[v])));
                next.insert(f);
            }
        }
        level = next;
    }
    level.into_iter().collect()
}

fn t_levels(module: &SympModule, lines: &[u64]) -> Vec<TLevel> {
    let g = module.genus();
    let p = module.modulus();
    let mut out = Vec::new();
    // lagrangian lines ℓ_1..ℓ_g, then partners m_1..m_g
    fn extend(
        module: &SympModule,
        lines: &[u64],
        chosen: &mut Vec<u64>,
        out: &mut Vec<TLevel>,
        g: usize,
        p: u32,
    ) {
        let k = chosen.len();
        if k == 2 * g {
            out.push(TLevel {
                lines: chosen.iter().map(|&v| module.span_codes(&[v])).collect(),
            });
            return;
        }
        let span = module.span_codes(&chosen[..k.min(g)]);
        for &v in lines {
            let ok = if k < g {
                !span.contains(v) && chosen.iter().all(|&x| module.pairing_codes(x, v) == 0)
            } else {
                let i = k - g;
                (0..g).all(|j| {
                    let pv = module.pairing_codes(chosen[j], v);
                    if j == i {
                        pv != 0
                    } else {
                        pv == 0
                    }
                }) && chosen[g..].iter().all(|&x| module.pairing_codes(x, v) == 0)
            };
            if ok {
                chosen.push(v);
                extend(module, lines, chosen, out, g, p);
                chosen.pop();
            }
        }
    }
    extend(module, lines, &mut Vec::new(), &mut out, g, p);
    out.sort();
    out
}

/// All structures of a kind on F_p^{2g}, sorted and deduplicated.
pub fn enumerate_structures(
    kind: &StructureKind,
    g: usize,
    p: u32,
    cap: u128,
) -> Result<Vec<LevelStructure>> {
    require_prime(p)?;
    let module = SympModule::new(g, p)?;
    let predicted = predicted_count(kind, g, p);
    if predicted > cap {
        return Err(Error::EnumerationTooLarge {
            what: format!("{kind:?} structures"),
            size: predicted,
            cap,
        });
    }
    let lines = module.line_generators();
    let mut out: Vec<LevelStructure> = match kind {
        StructureKind::T => t_levels(&module, &lines)
            .into_iter()
            .map(LevelStructure::T)
            .collect(),
        _ => {
            let set: BTreeSet<LevelStructure> = isotropic_flags(&module, &lines)
                .into_iter()
                .map(|flag| {
                    project(&module, &LevelStructure::B(BLevel { flag }), kind)
                        .expect("B projects to coarser kinds")
                })
                .collect();
            set.into_iter().collect()
        }
    };
    out.sort();
    Ok(out)
}

/// Closed-form counts: `|Sp| / |stabilizer|`.
pub fn predicted_count(kind: &StructureKind, g: usize, p: u32) -> u128 {
    let q = p as u128;
    let borel_index: u128 = crate::weyl::all_elements(g)
        .iter()
        .map(|w| q.pow(w.length() as u32))
        .sum();
    let poincare = |i: &[usize]| -> u128 {
        subgroup_generated(g, i)
            .iter()
            .map(|w| q.pow(w.length() as u32))
            .sum()
    };
    match kind {
        StructureKind::P => (1..=g as u32).map(|i| q.pow(i) + 1).product(),
        StructureKind::B => borel_index,
        StructureKind::Parabolic(i) => borel_index / poincare(i),
        StructureKind::T => crate::sympgrp::group_order(g, p) / (q - 1).pow(g as u32),
    }
}

/// Orbit of `start` under the standard generators of Sp(2g, ℤ/nℤ).
pub fn orbit(
    module: &SympModule,
    start: &LevelStructure,
    cap: usize,
) -> Result<Vec<LevelStructure>> {
    let gens = sp_generators(module.genus(), module.modulus());
    let mut seen = BTreeSet::from([start.clone()]);
    let mut queue = VecDeque::from([start.clone()]);
    while let Some(s) = queue.pop_front() {
        for m in &gens {
            let t = act(module, m, &s);
            if seen.insert(t.clone()) {
                if seen.len() > cap {
                    return Err(Error::EnumerationTooLarge {
                        what: "structure orbit".into(),
                        size: seen.len() as u128,
                        cap: cap as u128,
                    });
                }
                queue.push_back(t);
            }
        }
    }
    Ok(seen.into_iter().collect())
}

/// A set partition of `0..len`, classes sorted internally and by least element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub classes: Vec<Vec<usize>>,
}

impl Partition {
    fn from_labels(labels: &[usize]) -> Self {
        let mut map: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, &l) in labels.iter().enumerate() {
            map.entry(l).or_default().push(i);
        }
        let mut classes: Vec<Vec<usize>> = map.into_values().collect();
        classes.sort();
        Self { classes }
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn is_discrete(&self) -> bool {
        self.classes.iter().all(|c| c.len() == 1)
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        self.0[ra.max(rb)] = ra.min(rb);
    }

    fn labels(mut self) -> Vec<usize> {
        (0..self.0.len()).map(|i| self.find(i)).collect()
    }
}

/// Classes of K-level points joined by chains of moves
/// `proj_K(t) ~ proj_K(v^σ t)` over T-levels `t` and `σ ∈ twists`.
pub fn connected_components(
    module: &SympModule,
    structures: &[LevelStructure],
    twists: &[WeylElement],
    t_levels: &[TLevel],
) -> Result<Partition> {
    let Some(first) = structures.first() else {
        return Ok(Partition { classes: vec![] });
    };
    let kind = first.kind();
    let index: HashMap<&LevelStructure, usize> =
        structures.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let locate = |s: &LevelStructure| {
        index
            .get(s)
            .copied()
            .ok_or_else(|| Error::InvalidParameter("projection outside the structure list".into()))
    };
    let mut uf = UnionFind((0..structures.len()).collect());
    for t in t_levels {
        let x = locate(&project(module, &LevelStructure::T(t.clone()), &kind)?)?;
        for sigma in twists {
            let moved = LevelStructure::T(weyl_twist(sigma, t));
            let y = locate(&project(module, &moved, &kind)?)?;
            uf.union(x, y);
        }
    }
    Ok(Partition::from_labels(&uf.labels()))
}

/// Fibers of the forgetful map `structures → target`.
pub fn projection_fibers(
    module: &SympModule,
    structures: &[LevelStructure],
    target: &StructureKind,
) -> Result<Partition> {
    let mut ids: HashMap<LevelStructure, usize> = HashMap::new();
    let mut labels = Vec::with_capacity(structures.len());
    for s in structures {
        let image = project(module, s, target)?;
        let next = ids.len();
        labels.push(*ids.entry(image).or_insert(next));
    }
    Ok(Partition::from_labels(&labels))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiberCheck {
    /// human-readable description of the comparison
    pub name: String,
    pub classes: usize,
    pub fibers: usize,
    pub equal: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiberReport {
    pub g: usize,
    pub p: u32,
    pub checks: Vec<FiberCheck>,
}

impl FiberReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.equal)
    }
}

fn word_label(w: &WeylElement) -> String {
    if w.is_identity() {
        "id".into()
    } else {
        w.reduced_word()
            .iter()
            .map(|i| format!("s{i}"))
            .collect::<Vec<_>>()
            .join("")
    }
}

/// Compares connectedness classes with projection fibers:
/// ρ_{k+1}-connected classes on `P_{I_k}`-levels against fibers over `P_{I_{k+1}}`,
/// `W_{I_k}`-connected classes on B-levels against fibers over `P_{I_k}`, and
/// single-class connectivity of P-levels under each nonzero σ ∈ (±1)^g.
pub fn fiber_equivalence_check(g: usize, p: u32, cap: u128) -> Result<FiberReport> {
    let module = SympModule::new(g, p)?;
    let t_all: Vec<TLevel> = enumerate_structures(&StructureKind::T, g, p, cap)?
        .into_iter()
        .map(|s| match s {
            LevelStructure::T(t) => t,
            _ => unreachable!("T enumeration yields T-levels"),
        })
        .collect();
    let mut checks = Vec::new();

    let structures_of = |kind: &StructureKind| enumerate_structures(kind, g, p, cap);

    let b_all = structures_of(&StructureKind::B)?;
    let id = connected_components(&module, &b_all, &[WeylElement::identity(g)], &t_all)?;
    checks.push(FiberCheck {
        name: "B-levels, sigma = id: discrete".into(),
        classes: id.len(),
        fibers: b_all.len(),
        equal: id.is_discrete(),
    });

    for k in 0..g {
        let kind = StructureKind::nested(g, k);
        let pts = structures_of(&kind)?;
        let sigma = WeylElement::simple(g, k + 1);
        let classes = connected_components(&module, &pts, std::slice::from_ref(&sigma), &t_all)?;
        let fibers = if k + 1 == g {
            Partition {
                classes: vec![(0..pts.len()).collect()],
            }
        } else {
            projection_fibers(&module, &pts, &StructureKind::nested(g, k + 1))?
        };
        checks.push(FiberCheck {
            name: format!(
                "P_I{k}-levels, sigma = {}: fibers over P_I{}",
                word_label(&sigma),
                k + 1
            ),
            classes: classes.len(),
            fibers: fibers.len(),
            equal: classes == fibers,
        });
    }

    for k in 1..g {
        let wk = subgroup_generated(g, &GeneratorSet::new(g).nested(k));
        let classes = connected_components(&module, &b_all, &wk, &t_all)?;
        let fibers = projection_fibers(&module, &b_all, &StructureKind::nested(g, k))?;
        checks.push(FiberCheck {
            name: format!("B-levels, W_I{k}-connected: fibers over P_I{k}"),
            classes: classes.len(),
            fibers: fibers.len(),
            equal: classes == fibers,
        });
    }

    let p_all = structures_of(&StructureKind::P)?;
    for sigma in sign_vectors(g).into_iter().filter(|s| !s.is_identity()) {
        let classes = connected_components(&module, &p_all, std::slice::from_ref(&sigma), &t_all)?;
        checks.push(FiberCheck {
            name: format!("P-levels, sigma = {}: one class", word_label(&sigma)),
            classes: classes.len(),
            fibers: 1,
            equal: classes.len() == 1,
        });
    }
    Ok(FiberReport { g, p, checks })
}

/// Elements of `group` fixing `s`.
pub fn stabilizer(
    module: &SympModule,
    group: &crate::sympgrp::GroupEnumeration,
    s: &LevelStructure,
) -> Vec<ModMatrix> {
    group.iter().filter(|m| act(module, m, s) == *s).collect()
}

/// `v^σ` agrees with `act(γ·lift(σ)⁻¹, t_std)` for `t = γ·t_std`.
pub fn twist_matches_lift(
    module: &SympModule,
    gamma: &SymplecticElement,
    sigma: &WeylElement,
) -> bool {
    let std = standard_structure(module, &StructureKind::T);
    let LevelStructure::T(t) = act(module, gamma.matrix(), &std) else {
        unreachable!("acting on a T-level gives a T-level")
    };
    let lhs = LevelStructure::T(weyl_twist(sigma, &t));
    let m = gamma
        .mul(&matrix_lift(sigma, module.modulus()).inverse())
        .expect("same shape");
    lhs == act(module, m.matrix(), &std)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bruhat::{BorelSubgroup, ParabolicSubgroup};
    use crate::sympgrp::{enumerate_sp, DEFAULT_CAP};
    use crate::weyl::all_elements;

    fn subspaces_brute_force(module: &SympModule, dim: usize) -> BTreeSet<Subgroup> {
        // every subgroup generated by `dim` vectors, kept when of order p^dim
        let p = module.modulus() as usize;
        let total = (module.modulus() as u64).pow(module.dim() as u32);
        let mut out = BTreeSet::new();
        let mut idx = vec![0u64; dim];
        loop {
            let h = module.span_codes(&idx);
            if h.order() == p.pow(dim as u32) {
                out.insert(h);
            }
            let mut k = 0;
            loop {
                if k == dim {
                    return out;
                }
                idx[k] += 1;
                if idx[k] < total {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }

    #[test]
    fn pairing_basics() {
        let m = SympModule::new(2, 5).unwrap();
        let e = |i| m.basis_vector(i);
        assert_eq!(m.pairing(&e(0), &e(2)), 1);
        assert_eq!(m.pairing(&e(2), &e(0)), 4);
        assert_eq!(m.pairing(&e(0), &e(1)), 0);
        for c in 0..625u64 {
            let x = m.decode(c);
            assert_eq!(m.pairing(&x, &x), 0);
        }
    }

    #[test]
    fn pairing_scales_by_multiplier() {
        let m = SympModule::new(1, 7).unwrap();
        let gamma = ModMatrix::from_i64(7, 2, 2, &[3, 1, 2, 5]).unwrap();
        let lambda = crate::sympgrp::multiplier_of(&gamma, 1).unwrap().unwrap();
        for a in 0..49u64 {
            for b in 0..49u64 {
                let (x, y) = (m.decode(a), m.decode(b));
                let lhs = m.pairing(&gamma.mul_vec(&x), &gamma.mul_vec(&y));
                assert_eq!(lhs as u64, lambda as u64 * m.pairing(&x, &y) as u64 % 7);
            }
        }
    }

    #[test]
    fn lagrangians_g2_p2() {
        let m = SympModule::new(2, 2).unwrap();
        let planes = subspaces_brute_force(&m, 2);
        assert_eq!(planes.len(), 35);
        let lagr: BTreeSet<Subgroup> = planes.into_iter().filter(|h| m.is_isotropic(h)).collect();
        assert_eq!(lagr.len(), 15);
        let enumerated: BTreeSet<Subgroup> =
            enumerate_structures(&StructureKind::P, 2, 2, DEFAULT_CAP)
                .unwrap()
                .into_iter()
                .map(|s| match s {
                    LevelStructure::P(p) => p.h,
                    _ => unreachable!(),
                })
                .collect();
        assert_eq!(enumerated, lagr);
    }

    #[test]
    fn structure_counts() {
        for (g, p) in [(1, 2), (1, 3), (2, 2), (2, 3)] {
            let module = SympModule::new(g, p).unwrap();
            for kind in [StructureKind::P, StructureKind::B, StructureKind::T] {
                let all = enumerate_structures(&kind, g, p, DEFAULT_CAP).unwrap();
                assert_eq!(
                    all.len() as u128,
                    predicted_count(&kind, g, p),
                    "{kind:?} g={g} p={p}"
                );
                assert!(all.iter().all(|s| s.is_valid(&module)));
                let orb = orbit(&module, &standard_structure(&module, &kind), 100_000).unwrap();
                assert_eq!(orb, all, "transitivity for {kind:?} g={g} p={p}");
            }
        }
        assert_eq!(predicted_count(&StructureKind::B, 2, 2), 45);
        assert_eq!(predicted_count(&StructureKind::T, 1, 2), 6);
    }

    #[test]
    fn stabilizers_are_standard_subgroups() {
        for (g, p) in [(1, 3), (2, 2), (2, 3)] {
            let module = SympModule::new(g, p).unwrap();
            let sp = enumerate_sp(g, p, DEFAULT_CAP).unwrap();
            let stab_p = stabilizer(
                &module,
                &sp,
                &standard_structure(&module, &StructureKind::P),
            );
            let par = ParabolicSubgroup::siegel(g, p);
            assert_eq!(stab_p.len() as u128, par.predicted_order());
            assert!(stab_p.iter().all(|m| par.contains(m)));
            let stab_b = stabilizer(
                &module,
                &sp,
                &standard_structure(&module, &StructureKind::B),
            );
            let borel = BorelSubgroup::new(g, p);
            assert_eq!(stab_b.len() as u128, borel.order());
            assert!(stab_b.iter().all(|m| borel.contains(m)));
            let stab_t = stabilizer(
                &module,
                &sp,
                &standard_structure(&module, &StructureKind::T),
            );
            assert_eq!(stab_t.len() as u128, (p as u128 - 1).pow(g as u32));
            let diagonal =
                |m: &ModMatrix| (0..2 * g).all(|r| (0..2 * g).all(|c| r == c || m.get(r, c) == 0));
            assert!(stab_t.iter().all(diagonal));
        }
    }

    #[test]
    fn action_and_projection() {
        let (g, p) = (2, 3);
        let module = SympModule::new(g, p).unwrap();
        let gens = sp_generators(g, p);
        let t = standard_structure(&module, &StructureKind::T);
        let id = ModMatrix::identity(p, 2 * g);
        assert_eq!(act(&module, &id, &t), t);
        let a = gens[1].mul_unchecked(&gens[0]).mul_unchecked(&gens[3]);
        let b = gens[4].mul_unchecked(&gens[0]).mul_unchecked(&gens[2]);
        assert_eq!(
            act(&module, &a.mul_unchecked(&b), &t),
            act(&module, &a, &act(&module, &b, &t))
        );
        for kind in [
            StructureKind::B,
            StructureKind::P,
            StructureKind::Parabolic(vec![2]),
        ] {
            let lhs = project(&module, &act(&module, &a, &t), &kind).unwrap();
            let rhs = act(&module, &a, &project(&module, &t, &kind).unwrap());
            assert_eq!(lhs, rhs);
        }
        let LevelStructure::T(tt) = &t else {
            unreachable!()
        };
        let p_level = project(&module, &t, &StructureKind::P).unwrap();
        assert_eq!(
            p_level,
            LevelStructure::P(PLevel {
                h: module.sum(&tt.lines[0], &tt.lines[1])
            })
        );
        assert!(project(&module, &p_level, &StructureKind::B).is_err());
    }

    #[test]
    fn flag_fibers_over_lagrangians() {
        let module = SympModule::new(2, 2).unwrap();
        let flags = enumerate_structures(&StructureKind::B, 2, 2, DEFAULT_CAP).unwrap();
        let fibers = projection_fibers(&module, &flags, &StructureKind::P).unwrap();
        assert_eq!(fibers.len(), 15);
        assert!(fibers.classes.iter().all(|c| c.len() == 3));
    }

    #[test]
    fn twist_is_a_left_action() {
        for (g, p) in [(1, 2), (2, 2)] {
            let ts = enumerate_structures(&StructureKind::T, g, p, DEFAULT_CAP).unwrap();
            let ws = all_elements(g);
            for s in &ts {
                let LevelStructure::T(t) = s else {
                    unreachable!()
                };
                assert_eq!(&weyl_twist(&WeylElement::identity(g), t), t);
                for a in &ws {
                    for b in &ws {
                        assert_eq!(
                            weyl_twist(&a.compose(b).unwrap(), t),
                            weyl_twist(a, &weyl_twist(b, t))
                        );
                    }
                }
            }
        }
        let module = SympModule::new(1, 2).unwrap();
        let LevelStructure::T(t) = standard_structure(&module, &StructureKind::T) else {
            unreachable!()
        };
        let swapped = weyl_twist(&WeylElement::simple(1, 1), &t);
        assert_eq!(swapped.lines, vec![t.lines[1].clone(), t.lines[0].clone()]);
    }

    #[test]
    fn twist_agrees_with_lift() {
        for (g, p) in [(1, 2), (1, 3), (2, 2)] {
            let module = SympModule::new(g, p).unwrap();
            let sp = enumerate_sp(g, p, DEFAULT_CAP).unwrap();
            let step = if g == 1 { 1 } else { 7 };
            for i in (0..sp.len()).step_by(step) {
                for sigma in all_elements(g) {
                    assert!(twist_matches_lift(&module, &sp.element(i), &sigma));
                }
            }
        }
    }

    #[test]
    fn components_small() {
        let report = fiber_equivalence_check(2, 2, DEFAULT_CAP).unwrap();
        assert!(report.passed(), "{report:?}");
        let report = fiber_equivalence_check(1, 3, DEFAULT_CAP).unwrap();
        assert!(report.passed(), "{report:?}");
    }
}
