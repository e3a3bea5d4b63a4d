//! Permutation modules on finite coset spaces `X_K = G(F_p)/K(F_p)`, with
//! pullback, pushforward, Weyl twists and the correspondences `D^σ`.
//!
//! A coset `xK` is identified with the level structure `x·s_K`, where `s_K` is the
//! standard structure whose stabilizer is `K`.

use std::collections::{BTreeMap, HashMap, VecDeque};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bruhat::{in_parabolic_pattern, BorelSubgroup, ParabolicSubgroup};
use crate::error::{Error, Result};
use crate::finalg::{Matrix, ModMatrix, Scalar};
use crate::levelstruct::{
    act, enumerate_structures, project, standard_structure, weyl_twist, LevelStructure,
    StructureKind, SympModule,
};
use crate::sympgrp::{closure, require_prime, sp_generators};
use crate::weyl::{all_elements, coset_representatives, matrix_lift, GeneratorSet, WeylElement};
use crate::RatMatrix;

/// Prime used for the modular full-rank certificate.
const CERT_PRIME: u32 = 2_147_483_647;

/// The finite set `X_K`, realized as the K-level structures on `F_p^{2g}`.
#[derive(Debug, Clone)]
pub struct CosetSpace {
    module: SympModule,
    kind: StructureKind,
    points: Vec<LevelStructure>,
    index: HashMap<LevelStructure, usize>,
}

impl CosetSpace {
    pub fn new(kind: StructureKind, g: usize, p: u32, cap: u128) -> Result<Self> {
        require_prime(p)?;
        let module = SympModule::new(g, p)?;
        let points = enumerate_structures(&kind, g, p, cap)?;
        let index = points
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        Ok(Self {
            module,
            kind,
            points,
            index,
        })
    }

    pub fn module(&self) -> &SympModule {
        &self.module
    }

    pub fn kind(&self) -> &StructureKind {
        &self.kind
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[LevelStructure] {
        &self.points
    }

    pub fn index_of(&self, s: &LevelStructure) -> Option<usize> {
        self.index.get(s).copied()
    }

    fn locate(&self, s: &LevelStructure) -> Result<usize> {
        self.index_of(s)
            .ok_or_else(|| Error::InvalidParameter(format!("structure outside X_{:?}", self.kind)))
    }

    /// One group element per coset, `reps[i]·s_K = points[i]`, found by BFS from the identity.
    pub fn representatives(&self) -> Vec<ModMatrix> {
        let g = self.module.genus();
        let p = self.module.modulus();
        let gens = sp_generators(g, p);
        let start = standard_structure(&self.module, &self.kind);
        let mut reps: Vec<Option<ModMatrix>> = vec![None; self.len()];
        let s0 = self.index[&start];
        reps[s0] = Some(ModMatrix::identity(p, 2 * g));
        let mut queue = VecDeque::from([s0]);
        while let Some(i) = queue.pop_front() {
            let x = reps[i].clone().expect("visited");
            for m in &gens {
                let y = m.mul_unchecked(&x);
                let j = self.index[&act(&self.module, m, &self.points[i])];
                if reps[j].is_none() {
                    reps[j] = Some(y);
                    queue.push_back(j);
                }
            }
        }
        reps.into_iter()
            .map(|r| r.expect("transitive action"))
            .collect()
    }
}

/// Sparse matrix of an operator `F(X) → F(Y)` in CSR layout, with rows indexed by `Y`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModuleOperator<T> {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<T>,
}

pub type RatOperator = ModuleOperator<BigRational>;

impl<T: Scalar> ModuleOperator<T> {
    /// Builds from `(row, col, value)` triplets; repeated positions are summed.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: Vec<(usize, usize, T)>,
    ) -> Result<Self> {
        let mut per_row: Vec<BTreeMap<usize, T>> = vec![BTreeMap::new(); rows];
        for (r, c, v) in triplets {
            if r >= rows || c >= cols {
                return Err(Error::DimensionMismatch(format!(
                    "entry ({r}, {c}) in a {rows}x{cols} operator"
                )));
            }
            let e = per_row[r].entry(c).or_insert_with(T::zero);
            *e = e.clone() + v;
        }
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::new();
        let mut vals = Vec::new();
        for row in per_row {
            for (c, v) in row {
                if !v.is_zero() {
                    col_idx.push(c);
                    vals.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Ok(Self {
            rows,
            cols,
            row_ptr,
            col_idx,
            vals,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            rows: n,
            cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            vals: vec![T::one(); n],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row_entries(&self, r: usize) -> impl Iterator<Item = (usize, &T)> {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(&self.vals[span])
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        self.row_entries(r)
            .find(|(j, _)| *j == c)
            .map_or_else(T::zero, |(_, v)| v.clone())
    }

    pub fn apply(&self, v: &[T]) -> Result<Vec<T>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} for a {}x{} operator",
                v.len(),
                self.rows,
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|r| {
                self.row_entries(r)
                    .fold(T::zero(), |acc, (c, a)| acc + a.clone() * v[c].clone())
            })
            .collect())
    }

    /// `self ∘ rhs`.
    pub fn compose(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} after {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut triplets = Vec::new();
        for r in 0..self.rows {
            for (k, a) in self.row_entries(r) {
                for (c, b) in rhs.row_entries(k) {
                    triplets.push((r, c, a.clone() * b.clone()));
                }
            }
        }
        Self::from_triplets(self.rows, rhs.cols, triplets)
    }

    pub fn transpose(&self) -> Self {
        let triplets = (0..self.rows)
            .flat_map(|r| self.row_entries(r).map(move |(c, v)| (c, r, v.clone())))
            .collect();
        Self::from_triplets(self.cols, self.rows, triplets).expect("shape")
    }

    pub fn to_dense(&self) -> Matrix<T> {
        let mut m = Matrix::zeros(self.rows, self.cols);
        for r in 0..self.rows {
            for (c, v) in self.row_entries(r) {
                m[(r, c)] = v.clone();
            }
        }
        m
    }

    pub fn row_sums(&self) -> Vec<T> {
        (0..self.rows)
            .map(|r| {
                self.row_entries(r)
                    .fold(T::zero(), |acc, (_, v)| acc + v.clone())
            })
            .collect()
    }

    pub fn column_sums(&self) -> Vec<T> {
        self.transpose().row_sums()
    }

    /// Exactly one entry equal to one in every row and every column.
    pub fn is_permutation(&self) -> bool {
        let t = self.transpose();
        self.rows == self.cols
            && [self, &t].iter().all(|m| {
                (0..m.rows).all(|r| {
                    let mut it = m.row_entries(r);
                    matches!((it.next(), it.next()), (Some((_, v)), None) if v.is_one())
                })
            })
    }
}

/// A forgetful map `X_fine → X_coarse` as an index table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Projection {
    map: Vec<usize>,
    coarse_len: usize,
}

impl Projection {
    pub fn new(fine: &CosetSpace, coarse: &CosetSpace) -> Result<Self> {
        let map = fine
            .points()
            .iter()
            .map(|s| coarse.locate(&project(fine.module(), s, coarse.kind())?))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            map,
            coarse_len: coarse.len(),
        })
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn fiber_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.coarse_len];
        for &y in &self.map {
            sizes[y] += 1;
        }
        sizes
    }

    /// Degree when all fibers have the same size.
    pub fn degree(&self) -> Option<usize> {
        let sizes = self.fiber_sizes();
        sizes.windows(2).all(|w| w[0] == w[1]).then(|| sizes[0])
    }
}

/// `π*`: `(π*f)(x) = f(π(x))`, a `|X_fine| × |X_coarse|` matrix.
pub fn pullback<T: Scalar>(pi: &Projection) -> ModuleOperator<T> {
    let triplets = pi
        .map
        .iter()
        .enumerate()
        .map(|(x, &y)| (x, y, T::one()))
        .collect();
    ModuleOperator::from_triplets(pi.map.len(), pi.coarse_len, triplets).expect("indices in range")
}

/// `π_*`: `(π_*F)(y) = Σ_{π(x)=y} F(x)`.
pub fn pushforward<T: Scalar>(pi: &Projection) -> ModuleOperator<T> {
    let triplets = pi
        .map
        .iter()
        .enumerate()
        .map(|(x, &y)| (y, x, T::one()))
        .collect();
    ModuleOperator::from_triplets(pi.coarse_len, pi.map.len(), triplets).expect("indices in range")
}

/// `v^{σ*}` on `F(X_T)`: `(v^{σ*}F)(xT) = F(x·lift(σ)T)`.
pub fn weyl_operator<T: Scalar>(
    x_t: &CosetSpace,
    sigma: &WeylElement,
) -> Result<ModuleOperator<T>> {
    if *x_t.kind() != StructureKind::T {
        return Err(Error::IncompatibleKinds(format!(
            "{:?} is not X_T",
            x_t.kind()
        )));
    }
    let inv = sigma.inverse();
    let triplets = x_t
        .points()
        .iter()
        .enumerate()
        .map(|(x, s)| {
            let LevelStructure::T(t) = s else {
                unreachable!("X_T holds T-levels")
            };
            let y = x_t.locate(&LevelStructure::T(weyl_twist(&inv, t)))?;
            Ok((x, y, T::one()))
        })
        .collect::<Result<Vec<_>>>()?;
    ModuleOperator::from_triplets(x_t.len(), x_t.len(), triplets)
}

/// Precomputed `X_T` together with its projection to a coarser `X_K`.
#[derive(Debug, Clone)]
pub struct CorrespondenceSystem {
    pub x_t: CosetSpace,
    pub x_k: CosetSpace,
    pub pi: Projection,
}

impl CorrespondenceSystem {
    pub fn new(target: StructureKind, g: usize, p: u32, cap: u128) -> Result<Self> {
        let x_t = CosetSpace::new(StructureKind::T, g, p, cap)?;
        let x_k = CosetSpace::new(target, g, p, cap)?;
        let pi = Projection::new(&x_t, &x_k)?;
        Ok(Self { x_t, x_k, pi })
    }

    /// `D^σ = π_* v^{σ*} π*` on `F(X_K)`.
    pub fn correspondence_d<T: Scalar>(&self, sigma: &WeylElement) -> Result<ModuleOperator<T>> {
        let v = weyl_operator::<T>(&self.x_t, sigma)?;
        pushforward::<T>(&self.pi).compose(&v.compose(&pullback(&self.pi))?)
    }

    pub fn degree(&self) -> Option<usize> {
        self.pi.degree()
    }
}

/// Rank over ℚ. A full rank modulo a large prime certifies full rational rank;
/// otherwise falls back to fraction-free elimination.
pub fn certified_rank(a: &RatMatrix) -> usize {
    let full = a.rows().min(a.cols());
    if full == 0 {
        return 0;
    }
    let ints = a.clear_denominators();
    let reduced = ModMatrix::from_int_matrix(&ints, CERT_PRIME).expect("prime modulus");
    if reduced.rank_mod_prime() == full {
        full
    } else {
        ints.bareiss_rank()
    }
}

/// Whether two column spans coincide.
pub fn same_span(a: &RatMatrix, b: &RatMatrix) -> Result<bool> {
    let ra = certified_rank(a);
    let rb = certified_rank(b);
    Ok(ra == rb && certified_rank(&a.hstack(b)?) == ra)
}

fn int_scalar(k: usize) -> BigRational {
    BigRational::from_integer(BigInt::from(k))
}

fn word_label(w: &WeylElement) -> String {
    if w.is_identity() {
        "id".into()
    } else {
        w.reduced_word().iter().map(|i| format!("s{i}")).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompositionReport {
    pub g: usize,
    pub p: u32,
    pub pairs_checked: usize,
    /// pairs `(σ, σ')` with `Im(D^σ D^σ') ≠ Im(D^{σσ'})`
    pub failures: Vec<(String, String)>,
    /// σ with `D^σ` of full rank
    pub invertible: usize,
    pub degree: usize,
    pub row_sums_constant: bool,
}

impl CompositionReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.row_sums_constant
    }
}

/// `Im(D^σ D^σ') = Im(D^{σσ'})` for all pairs in `W × W`, on `F(X_B)`.
pub fn composition_lemma_check(g: usize, p: u32, cap: u128) -> Result<CompositionReport> {
    let sys = CorrespondenceSystem::new(StructureKind::B, g, p, cap)?;
    let degree = sys
        .degree()
        .ok_or_else(|| Error::InvalidParameter("unequal fibers".into()))?;
    let ws = all_elements(g);
    let ds: Vec<RatOperator> = ws
        .iter()
        .map(|w| sys.correspondence_d(w))
        .collect::<Result<_>>()?;
    let row_sums_constant = ds
        .iter()
        .all(|d| d.row_sums().iter().all(|s| *s == int_scalar(degree)));
    let dense: Vec<RatMatrix> = ds.iter().map(ModuleOperator::to_dense).collect();
    let invertible = dense
        .iter()
        .filter(|d| certified_rank(d) == sys.x_k.len())
        .count();
    let position: HashMap<&WeylElement, usize> =
        ws.iter().enumerate().map(|(i, w)| (w, i)).collect();
    let mut failures = Vec::new();
    for (i, a) in ws.iter().enumerate() {
        for (j, b) in ws.iter().enumerate() {
            let prod = ds[i].compose(&ds[j])?.to_dense();
            let ab = a.compose(b)?;
            if !same_span(&prod, &dense[position[&ab]])? {
                failures.push((word_label(a), word_label(b)));
            }
        }
    }
    Ok(CompositionReport {
        g,
        p,
        pairs_checked: ws.len() * ws.len(),
        failures,
        invertible,
        degree,
        row_sums_constant,
    })
}

/// Simple reflection indices `I` with `P_I` equal to the subgroup generated by `gens`,
/// together with its order.
pub fn identify_parabolic(
    gens: &[ModMatrix],
    g: usize,
    p: u32,
    cap: u128,
) -> Result<(Vec<usize>, u128)> {
    let group = closure(gens, p, 2 * g, cap)?;
    let order = group.len() as u128;
    let all = GeneratorSet::new(g).indices();
    for mask in 0..1u32 << g {
        let i_set: Vec<usize> = all
            .iter()
            .copied()
            .filter(|i| mask >> (i - 1) & 1 == 1)
            .collect();
        let par = ParabolicSubgroup::new(g, p, &i_set)?;
        if par.predicted_order() == order && gens.iter().all(|m| in_parabolic_pattern(m, g, &i_set))
        {
            return Ok((i_set, order));
        }
    }
    Err(Error::InvalidParameter(
        "subgroup is not a standard parabolic".into(),
    ))
}

/// The structure kind whose stabilizer is `P_I`; `None` encodes the whole group.
fn kind_of_parabolic(g: usize, i_set: &[usize]) -> StructureKind {
    let gs = GeneratorSet::new(g);
    if i_set.is_empty() {
        StructureKind::B
    } else if i_set == gs.siegel() {
        StructureKind::P
    } else {
        StructureKind::Parabolic(i_set.to_vec())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPullbackReport {
    pub sigma: String,
    /// `I` with `⟨B, σBσ⁻¹⟩ = P_I`
    pub parabolic: Vec<usize>,
    pub parabolic_order: u128,
    pub degree: usize,
    pub plus_dim: usize,
    pub minus_dim: usize,
    pub pullback_dim: usize,
    pub contained: bool,
}

/// Eigenvectors of `D^σ` on `F(X_B)` with eigenvalue `±deg` against the pullback from
/// `X_{P'}`, `P' = ⟨B, σBσ⁻¹⟩`.
pub fn eigen_pullback_check(
    sigma: &WeylElement,
    g: usize,
    p: u32,
    cap: u128,
) -> Result<EigenPullbackReport> {
    let sys = CorrespondenceSystem::new(StructureKind::B, g, p, cap)?;
    eigen_pullback_with(&sys, sigma, cap)
}

pub fn eigen_pullback_with(
    sys: &CorrespondenceSystem,
    sigma: &WeylElement,
    cap: u128,
) -> Result<EigenPullbackReport> {
    let g = sys.x_k.module().genus();
    let p = sys.x_k.module().modulus();
    let degree = sys
        .degree()
        .ok_or_else(|| Error::InvalidParameter("unequal fibers".into()))?;
    let borel = BorelSubgroup::new(g, p).generators();
    let lift = matrix_lift(sigma, p);
    let (l, l_inv) = (lift.matrix(), lift.inverse().into_matrix());
    let mut gens = borel.clone();
    gens.extend(
        borel
            .iter()
            .map(|b| l.mul_unchecked(b).mul_unchecked(&l_inv)),
    );
    let (parabolic, parabolic_order) = identify_parabolic(&gens, g, p, cap)?;

    let x_p = CosetSpace::new(kind_of_parabolic(g, &parabolic), g, p, cap)?;
    let pull = pullback::<BigRational>(&Projection::new(&sys.x_k, &x_p)?).to_dense();
    let d = sys.correspondence_d::<BigRational>(sigma)?.to_dense();
    let n = sys.x_k.len();
    let shift = RatMatrix::identity(n).scale(&int_scalar(degree));
    // pull is injective, so ker(A) ⊂ im(pull) iff nullity(A) = nullity(A·pull)
    let base = certified_rank(&pull);
    let mut dims = [0; 2];
    let mut contained = true;
    for (dim, a) in dims.iter_mut().zip([d.sub(&shift)?, d.add(&shift)?]) {
        *dim = n - certified_rank(&a);
        let restricted = base - certified_rank(&a.mul(&pull)?);
        contained &= restricted == *dim;
    }
    let [plus_dim, minus_dim] = dims;
    Ok(EigenPullbackReport {
        sigma: word_label(sigma),
        parabolic,
        parabolic_order,
        degree,
        plus_dim,
        minus_dim,
        pullback_dim: base,
        contained,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DoubleCosetCounts {
    pub g: usize,
    pub p: u32,
    /// `#(P\G/B)`
    pub parabolic_borel: usize,
    /// `#(B\G/B)`
    pub borel_borel: usize,
    /// `|W / W_P|` and `|W|`
    pub weyl_counts: (usize, usize),
}

impl DoubleCosetCounts {
    pub fn predicted(&self) -> (usize, usize) {
        let fact: usize = (1..=self.g).product();
        (1 << self.g, fact << self.g)
    }

    pub fn matches(&self) -> bool {
        let pred = self.predicted();
        (self.parabolic_borel, self.borel_borel) == pred && self.weyl_counts == pred
    }
}

fn orbit_count(space: &CosetSpace, gens: &[ModMatrix]) -> usize {
    let mut label: Vec<Option<usize>> = vec![None; space.len()];
    let mut orbits = 0;
    for start in 0..space.len() {
        if label[start].is_some() {
            continue;
        }
        label[start] = Some(orbits);
        let mut queue = VecDeque::from([start]);
        while let Some(i) = queue.pop_front() {
            for m in gens {
                let j = space.index[&act(space.module(), m, &space.points[i])];
                if label[j].is_none() {
                    label[j] = Some(orbits);
                    queue.push_back(j);
                }
            }
        }
        orbits += 1;
    }
    orbits
}

/// Orbit counts of the Siegel parabolic and of the Borel on `X_B`.
pub fn double_coset_dimensions(g: usize, p: u32, cap: u128) -> Result<DoubleCosetCounts> {
    let x_b = CosetSpace::new(StructureKind::B, g, p, cap)?;
    let siegel = ParabolicSubgroup::siegel(g, p);
    let parabolic_borel = orbit_count(&x_b, &siegel.generators());
    let borel_borel = orbit_count(&x_b, &BorelSubgroup::new(g, p).generators());
    let weyl_counts = (
        coset_representatives(g, siegel.i_set()).len(),
        all_elements(g).len(),
    );
    Ok(DoubleCosetCounts {
        g,
        p,
        parabolic_borel,
        borel_borel,
        weyl_counts,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CopyReport {
    pub g: usize,
    pub p: u32,
    /// auxiliary prime carrying the Siegel level away from `p`
    pub n: u32,
    pub seed: u64,
    /// dimension of the pullback copy `1 ⊗ F(X_P(n))`
    pub base_dim: usize,
    /// σ whose image of the pullback copy equals the copy itself
    pub coinciding: usize,
    pub sigmas: usize,
    /// dimension of `span{D^σ c}` for a generic `c` in the copy
    pub generic_span_dim: usize,
    pub bi_invariant_dim: usize,
}

impl CopyReport {
    pub fn all_coincide(&self) -> bool {
        self.coinciding == self.sigmas
    }

    pub fn attains_bi_invariant(&self) -> bool {
        self.generic_span_dim == self.bi_invariant_dim
    }
}

/// `(D ⊗ 1)v` for `v` indexed by `x·m + y`.
fn apply_left<T: Scalar>(d: &ModuleOperator<T>, v: &[T], m: usize) -> Vec<T> {
    let mut out = vec![T::zero(); d.rows() * m];
    for x in 0..d.rows() {
        for (x2, a) in d.row_entries(x) {
            for y in 0..m {
                out[x * m + y] = out[x * m + y].clone() + a.clone() * v[x2 * m + y].clone();
            }
        }
    }
    out
}

/// The D-correspondences at `p` applied to forms pulled back from level `n` (another
/// prime), modeled on `F(X_B(p) × X_P(n))`.
pub fn copy_independence_analog(g: usize, p: u32, seed: u64, cap: u128) -> Result<CopyReport> {
    let n = if p == 2 { 3 } else { 2 };
    let sys = CorrespondenceSystem::new(StructureKind::B, g, p, cap)?;
    let x_n = CosetSpace::new(StructureKind::P, g, n, cap)?;
    let (b, m) = (sys.x_k.len(), x_n.len());
    let mut copy_cols = Vec::with_capacity(m);
    for y in 0..m {
        let mut v = vec![BigRational::zero(); b * m];
        for x in 0..b {
            v[x * m + y] = BigRational::one();
        }
        copy_cols.push(v);
    }
    let copy = RatMatrix::from_columns(b * m, &copy_cols);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h: Vec<BigRational> = (0..m)
        .map(|_| BigRational::from_integer(BigInt::from(rng.gen_range(-9i64..=9))))
        .collect();
    let c: Vec<BigRational> = (0..b * m).map(|i| h[i % m].clone()).collect();

    let ws = all_elements(g);
    let mut coinciding = 0;
    let mut generic = Vec::with_capacity(ws.len());
    for w in &ws {
        let d = sys.correspondence_d::<BigRational>(w)?;
        let image: Vec<Vec<BigRational>> = copy_cols.iter().map(|v| apply_left(&d, v, m)).collect();
        if same_span(&copy, &RatMatrix::from_columns(b * m, &image))? {
            coinciding += 1;
        }
        generic.push(apply_left(&d, &c, m));
    }
    let generic_span_dim = certified_rank(&RatMatrix::from_columns(b * m, &generic));
    let counts = double_coset_dimensions(g, p, cap)?;
    Ok(CopyReport {
        g,
        p,
        n,
        seed,
        base_dim: m,
        coinciding,
        sigmas: ws.len(),
        generic_span_dim,
        bi_invariant_dim: counts.borel_borel,
    })
}

/// `D^σ` row sums, all equal to the degree of `X_T → X_K`.
pub fn expected_degree(kind: &StructureKind, g: usize, p: u32) -> u128 {
    let t = crate::levelstruct::predicted_count(&StructureKind::T, g, p);
    t / crate::levelstruct::predicted_count(kind, g, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sympgrp::{enumerate_sp, DEFAULT_CAP};
    use crate::weyl::sign_vectors;

    fn rat(k: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(k))
    }

    #[test]
    fn coset_spaces_partition_the_group() {
        for (g, p) in [(1, 3), (2, 2)] {
            let sp = enumerate_sp(g, p, DEFAULT_CAP).unwrap();
            for kind in [StructureKind::P, StructureKind::B, StructureKind::T] {
                let x = CosetSpace::new(kind.clone(), g, p, DEFAULT_CAP).unwrap();
                let reps = x.representatives();
                let std = standard_structure(x.module(), &kind);
                for (r, s) in reps.iter().zip(x.points()) {
                    assert_eq!(&act(x.module(), r, &std), s);
                }
                let mut hits = vec![0usize; x.len()];
                for m in sp.iter() {
                    hits[x.index_of(&act(x.module(), &m, &std)).unwrap()] += 1;
                }
                let k = sp.len() / x.len();
                assert!(hits.iter().all(|&h| h == k), "{kind:?}");
            }
        }
    }

    #[test]
    fn pullback_and_pushforward() {
        let x_b = CosetSpace::new(StructureKind::B, 2, 2, DEFAULT_CAP).unwrap();
        for i_set in [vec![1], vec![2], vec![1, 2]] {
            let x_p = CosetSpace::new(kind_of_parabolic(2, &i_set), 2, 2, DEFAULT_CAP).unwrap();
            let pi = Projection::new(&x_b, &x_p).unwrap();
            let pull = pullback::<BigRational>(&pi);
            assert_eq!(certified_rank(&pull.to_dense()), x_p.len());
            let push = pushforward::<BigRational>(&pi);
            let deg = pi.degree().unwrap();
            assert_eq!(
                push.compose(&pull).unwrap(),
                RatOperator::identity(x_p.len())
                    .compose(
                        &ModuleOperator::from_triplets(
                            x_p.len(),
                            x_p.len(),
                            (0..x_p.len()).map(|i| (i, i, rat(deg as i64))).collect()
                        )
                        .unwrap()
                    )
                    .unwrap()
            );
            assert!(push.column_sums().iter().all(|s| s.is_one()));
            assert!(push.row_sums().iter().all(|s| *s == rat(deg as i64)));
        }
        // indicator of one Lagrangian pulls back to its three flags
        let x_p = CosetSpace::new(StructureKind::P, 2, 2, DEFAULT_CAP).unwrap();
        let pull = pullback::<i64>(&Projection::new(&x_b, &x_p).unwrap());
        let mut e = vec![0i64; x_p.len()];
        e[4] = 1;
        let f = pull.apply(&e).unwrap();
        assert_eq!(f.iter().sum::<i64>(), 3);
        let ones = pull.apply(&vec![1; x_p.len()]).unwrap();
        assert!(ones.iter().all(|&v| v == 1));
        assert!(pushforward::<i64>(&Projection::new(&x_b, &x_p).unwrap())
            .apply(&vec![0; x_b.len()])
            .unwrap()
            .iter()
            .all(|&v| v == 0));
    }

    #[test]
    fn torus_fiber_degree_g1_p3() {
        let sys = CorrespondenceSystem::new(StructureKind::B, 1, 3, DEFAULT_CAP).unwrap();
        assert_eq!(sys.degree(), Some(3));
        let d = sys
            .correspondence_d::<i64>(&WeylElement::identity(1))
            .unwrap();
        assert_eq!(
            d,
            ModuleOperator::from_triplets(4, 4, (0..4).map(|i| (i, i, 3)).collect()).unwrap()
        );
    }

    #[test]
    fn weyl_operators_are_permutations() {
        for (g, p) in [(1, 2), (1, 3), (2, 2), (2, 3)] {
            let x_t = CosetSpace::new(StructureKind::T, g, p, DEFAULT_CAP).unwrap();
            let ws = all_elements(g);
            let ops: Vec<ModuleOperator<i64>> =
                ws.iter().map(|w| weyl_operator(&x_t, w).unwrap()).collect();
            for (w, v) in ws.iter().zip(&ops) {
                assert!(v.is_permutation());
                if w.is_identity() {
                    assert_eq!(*v, ModuleOperator::identity(x_t.len()));
                }
                if w.order() == 2 {
                    assert_eq!(v.compose(v).unwrap(), ModuleOperator::identity(x_t.len()));
                }
            }
            if g == 2 && p == 3 {
                continue;
            }
            for (i, a) in ws.iter().enumerate() {
                for (j, b) in ws.iter().enumerate() {
                    let ab = a.compose(b).unwrap();
                    let k = ws.iter().position(|w| *w == ab).unwrap();
                    assert_eq!(ops[i].compose(&ops[j]).unwrap(), ops[k]);
                }
            }
        }
    }

    #[test]
    fn weyl_operator_matches_right_multiplication() {
        let (g, p) = (2, 2);
        let x_t = CosetSpace::new(StructureKind::T, g, p, DEFAULT_CAP).unwrap();
        let reps = x_t.representatives();
        let std = standard_structure(x_t.module(), &StructureKind::T);
        for w in all_elements(g) {
            let v = weyl_operator::<i64>(&x_t, &w).unwrap();
            let lift = matrix_lift(&w, p);
            for (x, r) in reps.iter().enumerate() {
                let moved = act(x_t.module(), &r.mul_unchecked(lift.matrix()), &std);
                let (y, _) = v.row_entries(x).next().unwrap();
                assert_eq!(x_t.index_of(&moved), Some(y));
            }
        }
    }

    #[test]
    fn correspondences_nonnegative_with_constant_row_sums() {
        for (g, p) in [(1, 2), (1, 3), (2, 2)] {
            for kind in [StructureKind::B, StructureKind::P] {
                let sys = CorrespondenceSystem::new(kind.clone(), g, p, DEFAULT_CAP).unwrap();
                let deg = expected_degree(&kind, g, p) as i64;
                assert_eq!(sys.degree(), Some(deg as usize));
                for w in all_elements(g) {
                    let d = sys.correspondence_d::<i64>(&w).unwrap();
                    assert!(d.row_sums().iter().all(|&s| s == deg));
                    assert!((0..d.rows()).all(|r| d.row_entries(r).all(|(_, &v)| v > 0)));
                }
            }
        }
        assert_eq!(expected_degree(&StructureKind::B, 2, 3), 81);
    }

    #[test]
    fn iwahori_hecke_relation() {
        // D^s = p^{g²-1} T_s with T_s² = (p-1)T_s + p
        let (g, p) = (2, 2);
        let sys = CorrespondenceSystem::new(StructureKind::B, g, p, DEFAULT_CAP).unwrap();
        let c = 2i64.pow(g as u32 * g as u32 - 1);
        for s in GeneratorSet::new(g).reflections() {
            let d = sys.correspondence_d::<i64>(&s).unwrap().to_dense();
            let lhs = d.mul(&d).unwrap();
            let rhs = d
                .scale(&(c * (p as i64 - 1)))
                .add(&Matrix::identity(d.rows()).scale(&(c * c * p as i64)))
                .unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn composition_lemma_g1() {
        for p in [2, 3] {
            let r = composition_lemma_check(1, p, DEFAULT_CAP).unwrap();
            assert!(r.passed(), "{r:?}");
            assert_eq!(r.pairs_checked, 4);
        }
    }

    #[test]
    fn double_cosets_small() {
        for (g, p, expect) in [(1, 3, (2, 2)), (2, 2, (4, 8)), (2, 3, (4, 8))] {
            let c = double_coset_dimensions(g, p, DEFAULT_CAP).unwrap();
            assert_eq!((c.parabolic_borel, c.borel_borel), expect);
            assert!(c.matches());
        }
    }

    #[test]
    fn eigen_pullback_sign_flip_g1() {
        let r = eigen_pullback_check(&WeylElement::simple(1, 1), 1, 3, DEFAULT_CAP).unwrap();
        assert_eq!(r.parabolic, vec![1]);
        assert_eq!(r.pullback_dim, 1);
        assert!(r.contained);
        assert_eq!(r.plus_dim, 1);
        let id = eigen_pullback_check(&WeylElement::identity(1), 1, 3, DEFAULT_CAP).unwrap();
        assert!(id.parabolic.is_empty());
        assert_eq!(id.plus_dim, 4);
        assert!(id.contained);
    }

    #[test]
    fn eigen_pullback_s1_g2() {
        let r = eigen_pullback_check(&WeylElement::simple(2, 1), 2, 2, DEFAULT_CAP).unwrap();
        assert_eq!(r.parabolic, vec![1]);
        assert!(r.contained, "{r:?}");
    }

    #[test]
    fn parabolic_of_sign_vectors_generates() {
        for sigma in sign_vectors(2).into_iter().filter(|s| !s.is_identity()) {
            let borel = BorelSubgroup::new(2, 2).generators();
            let lift = matrix_lift(&sigma, 2);
            let mut gens = borel.clone();
            let inv = lift.inverse().into_matrix();
            gens.extend(
                borel
                    .iter()
                    .map(|b| lift.matrix().mul_unchecked(b).mul_unchecked(&inv)),
            );
            let (i_set, order) = identify_parabolic(&gens, 2, 2, DEFAULT_CAP).unwrap();
            assert!(i_set.contains(&2));
            assert!(order > BorelSubgroup::new(2, 2).order());
        }
    }

    #[test]
    fn copy_coincidence_g1() {
        for p in [2, 3] {
            let r = copy_independence_analog(1, p, 42, DEFAULT_CAP).unwrap();
            assert!(r.all_coincide());
            assert_eq!(r.generic_span_dim, 1);
            assert_eq!(r.bi_invariant_dim, 2);
            assert!(!r.attains_bi_invariant());
        }
    }

    #[test]
    fn certified_rank_agrees_with_elimination() {
        let m = RatMatrix::from_rows(vec![
            vec![rat(1), rat(2), rat(3)],
            vec![rat(2), rat(4), rat(6)],
            vec![rat(0), rat(1), rat(1)],
        ]);
        assert_eq!(certified_rank(&m), 2);
        assert_eq!(certified_rank(&m), m.rank());
        assert_eq!(certified_rank(&RatMatrix::identity(5)), 5);
    }
}
