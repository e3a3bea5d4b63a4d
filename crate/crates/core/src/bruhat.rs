//! Bruhat cells, standard parabolics and congruence images.
//!
//! Reordering the basis as `e_1, …, e_g, f_g, …, f_1` turns B into the
//! upper-triangular elements of Sp, and every standard parabolic P_I into a
//! block upper-triangular pattern. Cells are read off from rank profiles.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::finalg::{inv_mod, is_prime, primitive_root, ModMatrix};
use crate::sympgrp::{
    closure, double_coset, enumerate_sp, group_order, group_order_mod, require_prime, ElementSet,
    GroupEnumeration, SymplecticElement,
};
use crate::weyl::{
    all_elements, matrix_lift, sign_vectors, subgroup_generated, GeneratorSet, WeylElement,
};

/// Position of basis vector `idx` (0..2g, e's then f's) in the reordered basis.
fn position(g: usize, idx: usize) -> usize {
    if idx < g {
        idx
    } else {
        2 * g - 1 - (idx - g)
    }
}

/// Inverse of [`position`].
fn basis_at(g: usize, pos: usize) -> usize {
    if pos < g {
        pos
    } else {
        g + (2 * g - 1 - pos)
    }
}

/// Block index of every reordered position for the parabolic of type `I`.
fn blocks(g: usize, i_set: &[usize]) -> Vec<usize> {
    let mut parent: Vec<usize> = (0..2 * g).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        parent[x] = r;
        r
    }
    let mut union = |a: usize, b: usize| {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        parent[ra.max(rb)] = ra.min(rb);
    };
    for &i in i_set {
        if i < g {
            union(i - 1, i);
            union(2 * g - i, 2 * g - 1 - i);
        } else {
            union(g - 1, g);
        }
    }
    // blocks are intervals; number them left to right
    let mut out = vec![0; 2 * g];
    for pos in 1..2 * g {
        out[pos] = if find(&mut parent, pos) == find(&mut parent, pos - 1) {
            out[pos - 1]
        } else {
            out[pos - 1] + 1
        };
    }
    out
}

/// Whether `m` has the block upper-triangular shape of P_I (membership in Sp
/// is assumed, not checked). Works for any modulus.
pub fn in_parabolic_pattern(m: &ModMatrix, g: usize, i_set: &[usize]) -> bool {
    let b = blocks(g, i_set);
    for r in 0..2 * g {
        for c in 0..2 * g {
            if b[position(g, r)] > b[position(g, c)] && m.get(r, c) != 0 {
                return false;
            }
        }
    }
    true
}

/// The Borel subgroup `[[A, A·S], [0, A^{−T}]]`, `A` upper-triangular.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BorelSubgroup {
    g: usize,
    n: u32,
}

impl BorelSubgroup {
    pub fn new(g: usize, n: u32) -> Self {
        Self { g, n }
    }

    /// Lower-left block zero, A upper- and D lower-triangular.
    pub fn contains(&self, m: &ModMatrix) -> bool {
        in_parabolic_pattern(m, self.g, &[])
    }

    /// Torus generators and one unipotent element per positive root.
    pub fn generators(&self) -> Vec<ModMatrix> {
        let (g, n) = (self.g, self.n);
        let mut gens = Vec::new();
        if n > 2 {
            let t = if is_prime(n) { primitive_root(n) } else { 2 };
            let t_inv = inv_mod(t, n).unwrap_or(1);
            for i in 0..g {
                let mut d = ModMatrix::identity(n, 2 * g);
                d.set(i, i, t);
                d.set(g + i, g + i, t_inv);
                gens.push(d);
            }
        }
        for i in 0..g {
            for j in i..g {
                if i < j {
                    // ε_i − ε_j
                    let mut x = ModMatrix::identity(n, 2 * g);
                    x.set(i, j, 1);
                    x.set_signed(g + j, g + i, -1);
                    gens.push(x);
                }
                // ε_i + ε_j (2ε_i when i = j)
                let mut y = ModMatrix::identity(n, 2 * g);
                y.set(i, g + j, 1);
                y.set(j, g + i, 1);
                gens.push(y);
            }
        }
        gens
    }

    pub fn order(&self) -> u128 {
        (self.n as u128 - 1).pow(self.g as u32) * (self.n as u128).pow((self.g * self.g) as u32)
    }

    pub fn enumerate(&self, cap: u128) -> Result<ElementSet> {
        closure(&self.generators(), self.n, 2 * self.g, cap)
    }
}

/// Standard parabolic `P_I = B W_I B`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParabolicSubgroup {
    g: usize,
    n: u32,
    i_set: Vec<usize>,
}

impl ParabolicSubgroup {
    pub fn new(g: usize, n: u32, i_set: &[usize]) -> Result<Self> {
        if i_set.iter().any(|&i| i == 0 || i > g) {
            return Err(Error::InvalidParameter(format!(
                "{i_set:?} is not a subset of S"
            )));
        }
        let set: BTreeSet<usize> = i_set.iter().copied().collect();
        Ok(Self {
            g,
            n,
            i_set: set.into_iter().collect(),
        })
    }

    pub fn siegel(g: usize, n: u32) -> Self {
        Self::new(g, n, &GeneratorSet::new(g).siegel()).expect("valid subset")
    }

    pub fn i_set(&self) -> &[usize] {
        &self.i_set
    }

    pub fn contains(&self, m: &ModMatrix) -> bool {
        in_parabolic_pattern(m, self.g, &self.i_set)
    }

    pub fn generators(&self) -> Vec<ModMatrix> {
        let mut gens = BorelSubgroup::new(self.g, self.n).generators();
        for &i in &self.i_set {
            gens.push(matrix_lift(&WeylElement::simple(self.g, i), self.n).into_matrix());
        }
        gens
    }

    /// `|B| · Σ_{w ∈ W_I} p^{ℓ(w)}` for prime modulus.
    pub fn predicted_order(&self) -> u128 {
        let poincare: u128 = subgroup_generated(self.g, &self.i_set)
            .iter()
            .map(|w| (self.n as u128).pow(w.length() as u32))
            .sum();
        BorelSubgroup::new(self.g, self.n).order() * poincare
    }

    pub fn enumerate(&self, cap: u128) -> Result<ElementSet> {
        closure(&self.generators(), self.n, 2 * self.g, cap)
    }
}

fn rank_block(m: &ModMatrix, g: usize, row_from: usize, col_to: usize) -> usize {
    // rows with reordered position ≥ row_from, columns with position ≤ col_to
    let n = 2 * g;
    if row_from >= n {
        return 0;
    }
    let rows = n - row_from;
    let cols = col_to + 1;
    let mut sub = ModMatrix::zeros(m.modulus(), rows, cols);
    for r in 0..rows {
        for c in 0..cols {
            sub.set(r, c, m.get(basis_at(g, row_from + r), basis_at(g, c)));
        }
    }
    sub.rank_mod_prime()
}

/// The Weyl element `w` with `m ∈ B·lift(w)·B`, from the rank profile of the
/// lower-left submatrices in the reordered basis. The modulus must be prime.
pub fn cell_of(m: &ModMatrix) -> WeylElement {
    let g = m.rows() / 2;
    let n = 2 * g;
    let mut ranks = vec![vec![0usize; n + 1]; n + 1];
    // ranks[i][j+1] = rank(rows ≥ i, cols ≤ j); zero-padded at i = n and j = −1
    for i in 0..n {
        for j in 0..n {
            ranks[i][j + 1] = rank_block(m, g, i, j);
        }
    }
    let mut gl_perm = vec![usize::MAX; n];
    for j in 0..n {
        for i in 0..n {
            let d = ranks[i][j + 1] + ranks[i + 1][j] - ranks[i + 1][j + 1] - ranks[i][j];
            if d == 1 {
                gl_perm[j] = i;
            }
        }
    }
    let mut perm = vec![0; g];
    let mut signs = vec![1i8; g];
    for i in 0..g {
        let r = gl_perm[i];
        if r < g {
            perm[i] = r;
        } else {
            perm[i] = n - 1 - r;
            signs[i] = -1;
        }
    }
    WeylElement::new(perm, &signs).expect("rank profile of an element of Sp")
}

/// Bruhat cell of an element of Sp(2g, F_p).
pub fn bruhat_cell(m: &SymplecticElement) -> Result<WeylElement> {
    require_prime(m.modulus())?;
    Ok(cell_of(m.matrix()))
}

/// Membership in P_I: by cell over F_p, by block pattern over composite ℤ/nℤ.
pub fn parabolic_membership(m: &SymplecticElement, i_set: &[usize]) -> bool {
    let g = m.genus();
    if is_prime(m.modulus()) {
        let w = cell_of(m.matrix());
        subgroup_generated(g, i_set).contains(&w)
    } else {
        in_parabolic_pattern(m.matrix(), g, i_set)
    }
}

/// `B·lift(w)·B` as an explicit set, by double-coset closure.
pub fn cell_set(w: &WeylElement, p: u32, cap: u128) -> Result<ElementSet> {
    let b = BorelSubgroup::new(w.genus(), p).generators();
    double_coset(&b, matrix_lift(w, p).matrix(), &b, cap)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellCount {
    pub w: WeylElement,
    pub length: usize,
    pub measured: usize,
    pub predicted: u128,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BruhatPartitionReport {
    pub g: usize,
    pub p: u32,
    pub group_order: u128,
    pub borel_order: usize,
    pub cells: Vec<CellCount>,
    /// every element lies in exactly one double-coset closure
    pub disjoint_cover: bool,
    /// the rank-profile classifier agrees with the closure sets everywhere
    pub fast_path_agrees: bool,
}

impl BruhatPartitionReport {
    pub fn passed(&self) -> bool {
        self.disjoint_cover
            && self.fast_path_agrees
            && self.cells.iter().all(|c| c.measured as u128 == c.predicted)
            && self.cells.iter().map(|c| c.measured as u128).sum::<u128>() == self.group_order
    }
}

/// Classifies every element of Sp(2g, F_p) into cells and checks it against
/// the cells built independently as `⟨B⟩·lift(w)·⟨B⟩` closures.
pub fn bruhat_partition(group: &GroupEnumeration) -> Result<BruhatPartitionReport> {
    let (g, p) = (group.genus(), group.modulus());
    require_prime(p)?;
    let borel = BorelSubgroup::new(g, p).enumerate(group.len() as u128)?;
    let mut owner: Vec<Option<usize>> = vec![None; group.len()];
    let mut disjoint = true;
    let mut agrees = true;
    let mut cells = Vec::new();
    let ws = all_elements(g);
    for (k, w) in ws.iter().enumerate() {
        let set = cell_set(w, p, group.len() as u128)?;
        for m in set.iter() {
            let idx = group.index_of(&m).expect("cell lies in Sp");
            if owner[idx].replace(k).is_some() {
                disjoint = false;
            }
        }
        cells.push(CellCount {
            w: w.clone(),
            length: w.length(),
            measured: set.len(),
            predicted: borel.len() as u128 * (p as u128).pow(w.length() as u32),
        });
    }
    for (idx, m) in group.iter().enumerate() {
        match owner[idx] {
            Some(k) if cell_of(&m) == ws[k] => {}
            Some(_) => agrees = false,
            None => disjoint = false,
        }
    }
    Ok(BruhatPartitionReport {
        g,
        p,
        group_order: group.len() as u128,
        borel_order: borel.len(),
        cells,
        disjoint_cover: disjoint,
        fast_path_agrees: agrees,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TitsReport {
    pub g: usize,
    pub p: u32,
    /// number of (ρ, σ, b) triples examined for T1
    pub t1_checked: usize,
    /// (ρ index, σ, cell found) for every T1 violation
    pub t1_failures: Vec<(usize, WeylElement, WeylElement)>,
    /// per ρ: whether some b ∈ B has ρbρ⁻¹ ∉ B
    pub t2: Vec<bool>,
}

impl TitsReport {
    pub fn passed(&self) -> bool {
        self.t1_failures.is_empty() && self.t2.iter().all(|&x| x)
    }
}

/// Exhaustive check of `ρBσ ⊆ BσB ∪ BρσB` and `ρBρ ≠ B` for ρ ∈ S, σ ∈ W.
pub fn tits_axioms_check(g: usize, p: u32, cap: u128) -> Result<TitsReport> {
    require_prime(p)?;
    let borel = BorelSubgroup::new(g, p);
    let b_set = borel.enumerate(cap)?;
    let ws = all_elements(g);
    let mut t1_checked = 0;
    let mut t1_failures = Vec::new();
    let mut t2 = Vec::new();
    for (ri, rho) in GeneratorSet::new(g).reflections().iter().enumerate() {
        let lr = matrix_lift(rho, p);
        let lr_inv = lr.inverse();
        for sigma in &ws {
            let ls = matrix_lift(sigma, p);
            let allowed = [sigma.clone(), rho.compose(sigma)?];
            for b in b_set.iter() {
                t1_checked += 1;
                let cell = cell_of(&lr.matrix().mul_unchecked(&b).mul_unchecked(ls.matrix()));
                if !allowed.contains(&cell) {
                    t1_failures.push((ri + 1, sigma.clone(), cell));
                }
            }
        }
        let moved = b_set.iter().any(|b| {
            !borel.contains(&lr.matrix().mul_unchecked(&b).mul_unchecked(lr_inv.matrix()))
        });
        t2.push(moved);
    }
    Ok(TitsReport {
        g,
        p,
        t1_checked,
        t1_failures,
        t2,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CensusReport {
    pub g: usize,
    pub p: u32,
    pub k: usize,
    /// distinct subgroups σ P_{I_k} σ⁻¹, σ ∈ W
    pub distinct_conjugates: usize,
    /// g!/(k+1)! · 2^g
    pub predicted_distinct: u128,
    /// how many of them lie in P_{I_{k+1}} (the whole group when k = g − 1)
    pub contained_in_next: usize,
    pub next_is_whole_group: bool,
    /// "has k+2 conjugates in" the next level
    pub predicted_k_plus_2: usize,
    /// "contains k+1 groups in level k−1", read literally at this k
    pub predicted_k_plus_1: usize,
}

impl CensusReport {
    pub fn distinct_matches(&self) -> bool {
        self.distinct_conjugates as u128 == self.predicted_distinct
    }

    /// The same statement with its level index shifted by one reads
    /// "P_{I_{k+1}} contains (k+1)+1 groups of level k".
    pub fn matches_k_plus_2(&self) -> bool {
        self.contained_in_next == self.predicted_k_plus_2
    }

    pub fn matches_k_plus_1(&self) -> bool {
        self.contained_in_next == self.predicted_k_plus_1
    }
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// Counts the Weyl conjugates of `P_{I_k}` as actual subgroups of Sp(2g, F_p).
pub fn parabolic_conjugate_census(g: usize, p: u32, k: usize, cap: u128) -> Result<CensusReport> {
    require_prime(p)?;
    if k >= g {
        return Err(Error::InvalidParameter(format!(
            "k = {k} must be below g = {g}"
        )));
    }
    let gens = GeneratorSet::new(g);
    let pk = ParabolicSubgroup::new(g, p, &gens.nested(k))?.enumerate(cap)?;
    let next_is_whole_group = k + 1 == g;
    let next = if next_is_whole_group {
        None
    } else {
        Some(ParabolicSubgroup::new(g, p, &gens.nested(k + 1))?.enumerate(cap)?)
    };
    let mut distinct: BTreeMap<Vec<u128>, bool> = BTreeMap::new();
    for sigma in all_elements(g) {
        let l = matrix_lift(&sigma, p);
        let conj = pk.conjugate(l.matrix(), l.inverse().matrix());
        if distinct.contains_key(conj.codes()) {
            continue;
        }
        let inside = next.as_ref().is_none_or(|nx| conj.is_subset(nx));
        distinct.insert(conj.codes().to_vec(), inside);
    }
    Ok(CensusReport {
        g,
        p,
        k,
        distinct_conjugates: distinct.len(),
        predicted_distinct: factorial(g) * (1u128 << g) / factorial(k + 1),
        contained_in_next: distinct.values().filter(|&&x| x).count(),
        next_is_whole_group,
        predicted_k_plus_2: k + 2,
        predicted_k_plus_1: k + 1,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationReport {
    pub sigma: WeylElement,
    pub closure_size: usize,
    pub group_order: u128,
}

impl GenerationReport {
    pub fn generates(&self) -> bool {
        self.closure_size as u128 == self.group_order
    }
}

/// Order of the subgroup generated by `P(F_p) ∪ σ P(F_p) σ⁻¹`.
pub fn generation_check(g: usize, p: u32, sigma: &WeylElement) -> Result<GenerationReport> {
    require_prime(p)?;
    let order = group_order(g, p);
    let mut gens = ParabolicSubgroup::siegel(g, p).generators();
    let l = matrix_lift(sigma, p);
    let l_inv = l.inverse();
    let conj: Vec<ModMatrix> = gens
        .iter()
        .map(|x| l.matrix().mul_unchecked(x).mul_unchecked(l_inv.matrix()))
        .collect();
    gens.extend(conj);
    let set = closure(&gens, p, 2 * g, order)?;
    Ok(GenerationReport {
        sigma: sigma.clone(),
        closure_size: set.len(),
        group_order: order,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParahoricDecomposition {
    pub g: usize,
    pub p: u32,
    /// (σ, |B·lift(σ)·P|) for σ ∈ (±1)^g
    pub sizes: Vec<(WeylElement, usize)>,
    pub disjoint: bool,
    pub covers: bool,
}

/// `Sp(2g, F_p) = ∐_{σ ∈ (±1)^g} B·lift(σ)·P`.
pub fn parahoric_bruhat_decomposition(
    g: usize,
    p: u32,
    cap: u128,
) -> Result<ParahoricDecomposition> {
    require_prime(p)?;
    let order = group_order(g, p);
    if order > cap {
        return Err(Error::EnumerationTooLarge {
            what: "parahoric decomposition".into(),
            size: order,
            cap,
        });
    }
    let b = BorelSubgroup::new(g, p).generators();
    let pg = ParabolicSubgroup::siegel(g, p).generators();
    let mut all: BTreeSet<u128> = BTreeSet::new();
    let mut disjoint = true;
    let mut sizes = Vec::new();
    for sigma in sign_vectors(g) {
        let set = double_coset(&b, matrix_lift(&sigma, p).matrix(), &pg, cap)?;
        for &c in set.codes() {
            if !all.insert(c) {
                disjoint = false;
            }
        }
        sizes.push((sigma, set.len()));
    }
    Ok(ParahoricDecomposition {
        g,
        p,
        sizes,
        disjoint,
        covers: all.len() as u128 == order,
    })
}

/// Which mod-n image defines a congruence subgroup Γ^tag(n).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CongruenceTag {
    Id,
    B,
    P,
    Parabolic(Vec<usize>),
    T,
}

/// A congruence subgroup, given by its image in Sp(2g, ℤ/nℤ).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CongruenceImage {
    pub tag: CongruenceTag,
    pub n: u32,
    pub g: usize,
}

impl CongruenceImage {
    pub fn contains(&self, m: &ModMatrix) -> bool {
        let g = self.g;
        match &self.tag {
            CongruenceTag::Id => m.is_identity(),
            CongruenceTag::B => in_parabolic_pattern(m, g, &[]),
            CongruenceTag::P => in_parabolic_pattern(m, g, &GeneratorSet::new(g).siegel()),
            CongruenceTag::Parabolic(i) => in_parabolic_pattern(m, g, i),
            CongruenceTag::T => (0..2 * g).all(|r| (0..2 * g).all(|c| r == c || m.get(r, c) == 0)),
        }
    }

    /// Size of the image, by filtering an enumeration of Sp(2g, ℤ/nℤ).
    pub fn image_order(&self, group: &GroupEnumeration) -> usize {
        group.iter().filter(|m| self.contains(m)).count()
    }
}

/// `[Sp(2g, ℤ) : Γ^tag(n)] = |Sp(2g, ℤ/nℤ)| / |image|`, assuming reduction is onto.
pub fn congruence_index(tag: CongruenceTag, n: u32, g: usize, cap: u128) -> Result<u128> {
    let group = enumerate_sp(g, n, cap)?;
    let image = CongruenceImage { tag, n, g }.image_order(&group) as u128;
    debug_assert_eq!(group_order_mod(g, n) % image, 0);
    Ok(group.len() as u128 / image)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sympgrp::DEFAULT_CAP;

    #[test]
    fn block_patterns() {
        assert_eq!(blocks(2, &[]), vec![0, 1, 2, 3]);
        assert_eq!(blocks(2, &[1]), vec![0, 0, 1, 1]);
        assert_eq!(blocks(2, &[2]), vec![0, 1, 1, 2]);
        assert_eq!(blocks(3, &[1, 2]), vec![0, 0, 0, 1, 1, 1]);
        assert_eq!(blocks(3, &[1, 2, 3]), vec![0; 6]);
    }

    #[test]
    fn borel_generators_generate_borel() {
        for (g, p) in [(1, 2), (1, 3), (2, 2), (2, 3)] {
            let borel = BorelSubgroup::new(g, p);
            let gen = borel.enumerate(DEFAULT_CAP).unwrap();
            assert_eq!(gen.len() as u128, borel.order());
            let sp = enumerate_sp(g, p, DEFAULT_CAP).unwrap();
            let filtered: Vec<ModMatrix> = sp.iter().filter(|m| borel.contains(m)).collect();
            assert_eq!(filtered.len(), gen.len());
            assert!(filtered.iter().all(|m| gen.contains(m)));
        }
        assert_eq!(BorelSubgroup::new(2, 2).order(), 16);
    }

    #[test]
    fn parabolic_generators_match_pattern() {
        for (g, p) in [(2, 2), (2, 3)] {
            let sp = enumerate_sp(g, p, DEFAULT_CAP).unwrap();
            for i_set in [vec![], vec![1], vec![2], vec![1, 2]] {
                let par = ParabolicSubgroup::new(g, p, &i_set).unwrap();
                let gen = par.enumerate(DEFAULT_CAP).unwrap();
                assert_eq!(gen.len() as u128, par.predicted_order());
                let filtered = sp.iter().filter(|m| par.contains(m)).count();
                assert_eq!(filtered, gen.len());
                let by_cell = sp
                    .iter()
                    .filter(|m| subgroup_generated(g, &i_set).contains(&cell_of(m)))
                    .count();
                assert_eq!(by_cell, gen.len());
            }
        }
    }

    #[test]
    fn lifts_lie_in_their_cells() {
        for g in 1..=3 {
            for w in all_elements(g) {
                assert_eq!(cell_of(matrix_lift(&w, 3).matrix()), w);
                assert_eq!(cell_of(matrix_lift(&w, 2).matrix()), w);
            }
        }
        assert!(cell_of(&ModMatrix::identity(5, 4)).is_identity());
    }

    #[test]
    fn partition_sp4_f2() {
        let sp = enumerate_sp(2, 2, DEFAULT_CAP).unwrap();
        let report = bruhat_partition(&sp).unwrap();
        assert!(report.passed(), "{report:?}");
        let mut sizes: Vec<usize> = report.cells.iter().map(|c| c.measured).collect();
        sizes.sort();
        assert_eq!(sizes, vec![16, 32, 32, 64, 64, 128, 128, 256]);
    }

    #[test]
    fn partition_small_groups() {
        for (g, p) in [(1, 2), (1, 3), (1, 5)] {
            let sp = enumerate_sp(g, p, DEFAULT_CAP).unwrap();
            assert!(bruhat_partition(&sp).unwrap().passed());
        }
    }

    #[test]
    fn cells_of_inverses() {
        let sp = enumerate_sp(2, 2, DEFAULT_CAP).unwrap();
        for i in 0..sp.len() {
            let m = sp.element(i);
            assert_eq!(cell_of(m.inverse().matrix()), cell_of(m.matrix()).inverse());
        }
    }

    #[test]
    fn membership_examples() {
        let g = 2;
        let p = 2;
        let sp = enumerate_sp(g, p, DEFAULT_CAP).unwrap();
        let count = (0..sp.len())
            .filter(|&i| parabolic_membership(&sp.element(i), &[1]))
            .count();
        assert_eq!(count, 48);
        let sg = matrix_lift(&WeylElement::simple(g, g), p);
        assert!(!parabolic_membership(&sg, &[1]));
        let sg9 = matrix_lift(&WeylElement::simple(g, g), 9);
        assert!(!parabolic_membership(&sg9, &[1]));
        assert!(parabolic_membership(&sg9, &[2]));
    }

    #[test]
    fn inclusion_of_standard_parabolics() {
        let (g, p) = (2, 3);
        let subsets = [vec![], vec![1], vec![2], vec![1, 2]];
        let sets: Vec<ElementSet> = subsets
            .iter()
            .map(|i| {
                ParabolicSubgroup::new(g, p, i)
                    .unwrap()
                    .enumerate(DEFAULT_CAP)
                    .unwrap()
            })
            .collect();
        for (a, ia) in subsets.iter().enumerate() {
            for (b, ib) in subsets.iter().enumerate() {
                let contained = ia.iter().all(|x| ib.contains(x));
                assert_eq!(sets[a].is_subset(&sets[b]), contained);
            }
        }
        // standard parabolics conjugate under W only to themselves
        for (a, ia) in subsets.iter().enumerate() {
            for w in all_elements(g) {
                let l = matrix_lift(&w, p);
                let c = sets[a].conjugate(l.matrix(), l.inverse().matrix());
                for (b, ib) in subsets.iter().enumerate() {
                    if c == sets[b] {
                        assert_eq!(ia, ib);
                    }
                }
            }
        }
    }

    #[test]
    fn tits_small() {
        assert!(tits_axioms_check(1, 2, DEFAULT_CAP).unwrap().passed());
        let r = tits_axioms_check(2, 2, DEFAULT_CAP).unwrap();
        assert!(r.passed());
        assert_eq!(r.t1_checked, 2 * 8 * 16);
    }

    #[test]
    fn census_g2() {
        let siegel = parabolic_conjugate_census(2, 2, 1, DEFAULT_CAP).unwrap();
        assert_eq!(siegel.distinct_conjugates, 4);
        assert!(siegel.distinct_matches());
        let borel = parabolic_conjugate_census(2, 2, 0, DEFAULT_CAP).unwrap();
        assert_eq!(borel.distinct_conjugates, 8);
        assert_eq!(borel.contained_in_next, 2);
        assert!(borel.matches_k_plus_2());
    }

    #[test]
    fn generation() {
        let r = generation_check(1, 3, &WeylElement::simple(1, 1)).unwrap();
        assert!(r.generates());
        assert_eq!(r.closure_size, 24);
        let id = generation_check(2, 2, &WeylElement::identity(2)).unwrap();
        assert!(!id.generates());
        assert_eq!(
            id.closure_size as u128,
            ParabolicSubgroup::siegel(2, 2).predicted_order()
        );
        for s in sign_vectors(2).into_iter().filter(|s| !s.is_identity()) {
            assert!(generation_check(2, 2, &s).unwrap().generates());
        }
    }

    #[test]
    fn parahoric_decomposition() {
        let d = parahoric_bruhat_decomposition(1, 3, DEFAULT_CAP).unwrap();
        assert!(d.disjoint && d.covers);
        assert_eq!(d.sizes.len(), 2);
        assert_eq!(d.sizes.iter().map(|s| s.1).sum::<usize>(), 24);
        let d = parahoric_bruhat_decomposition(2, 2, DEFAULT_CAP).unwrap();
        assert!(d.disjoint && d.covers);
        assert_eq!(d.sizes.len(), 4);
    }

    #[test]
    fn congruence_indices() {
        assert_eq!(
            congruence_index(CongruenceTag::Id, 2, 1, DEFAULT_CAP).unwrap(),
            6
        );
        assert_eq!(
            congruence_index(CongruenceTag::P, 2, 1, DEFAULT_CAP).unwrap(),
            3
        );
        assert_eq!(
            congruence_index(CongruenceTag::B, 2, 2, DEFAULT_CAP).unwrap(),
            45
        );
        // Poincaré polynomial of C_2 at q = 2
        let poincare: u128 = all_elements(2)
            .iter()
            .map(|w| 2u128.pow(w.length() as u32))
            .sum();
        assert_eq!(poincare, 45);
        // Γ_0(4) has index 6 in SL_2(Z)
        assert_eq!(
            congruence_index(CongruenceTag::P, 4, 1, DEFAULT_CAP).unwrap(),
            6
        );
        // Γ_0(6): index 12
        assert_eq!(
            congruence_index(CongruenceTag::B, 6, 1, DEFAULT_CAP).unwrap(),
            12
        );
    }
}
