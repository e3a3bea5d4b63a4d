//! Lattices in `ℚ^{2g}` with `p`-power denominators, isogeny pairs, self-dual
//! chains and the Atkin–Lehner involutions on them.
//!
//! A lattice is stored exactly as `p^{-s}·rowspan(B)`, `B` an integer Hermite basis
//! whose entries are not all divisible by `p`. Homothety classes are the basis
//! alone; chains are normalized so their first lattice is `⊆ ℤ^{2g}`, `⊄ pℤ^{2g}`.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::finalg::{hermite_rows, inv_mod, ModMatrix};
use crate::levelstruct::{
    enumerate_structures, project, weyl_twist, BLevel, LevelStructure, StructureKind, SympModule,
    TLevel,
};
use crate::sympgrp::require_prime;
use crate::weyl::{all_elements, WeylElement};
use crate::{IntMatrix, RatMatrix};

/// `p^{-scale}·rowspan(basis)`, full rank in dimension `2g`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lattice {
    p: u32,
    dim: usize,
    scale: i32,
    /// row-major Hermite basis
    basis: Vec<BigInt>,
}

fn big(x: i64) -> BigInt {
    BigInt::from(x)
}

fn p_pow(p: u32, k: u32) -> BigInt {
    num_traits::pow(BigInt::from(p), k as usize)
}

/// `v_p(x)` for nonzero `x`.
fn valuation(x: &BigInt, p: u32) -> u32 {
    let pb = BigInt::from(p);
    let mut x = x.abs();
    let mut v = 0;
    while (&x % &pb).is_zero() {
        x /= &pb;
        v += 1;
    }
    v
}

impl Lattice {
    /// `p^{-scale}·rowspan(rows)`; `rows` must have full rank.
    pub fn from_rows(p: u32, rows: &IntMatrix, scale: i32) -> Result<Self> {
        require_prime(p)?;
        let dim = rows.cols();
        let h = hermite_rows(rows);
        if h.rows() != dim {
            return Err(Error::InvalidParameter(format!(
                "rank {} generators for a lattice of rank {dim}",
                h.rows()
            )));
        }
        let mut basis: Vec<BigInt> = h.as_slice().to_vec();
        let mut scale = scale;
        let pb = BigInt::from(p);
        while basis.iter().all(|x| (x % &pb).is_zero()) {
            basis.iter_mut().for_each(|x| *x /= &pb);
            scale -= 1;
        }
        Ok(Self {
            p,
            dim,
            scale,
            basis,
        })
    }

    /// `ℤ^{2g}`.
    pub fn standard(g: usize, p: u32) -> Result<Self> {
        Self::from_rows(p, &IntMatrix::identity(2 * g), 0)
    }

    pub fn prime(&self) -> u32 {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn genus(&self) -> usize {
        self.dim / 2
    }

    pub fn scale(&self) -> i32 {
        self.scale
    }

    pub fn basis(&self) -> IntMatrix {
        IntMatrix::from_vec(self.dim, self.dim, self.basis.clone()).expect("square basis")
    }

    pub fn basis_rows(&self) -> Vec<Vec<i64>> {
        self.basis
            .chunks(self.dim)
            .map(|r| {
                r.iter()
                    .map(|x| x.to_i64().expect("small entries"))
                    .collect()
            })
            .collect()
    }

    /// `p^k·L`.
    pub fn scaled(&self, k: i32) -> Self {
        Self {
            scale: self.scale - k,
            ..self.clone()
        }
    }

    /// Integer basis of `p^{target}·L`; requires `target ≥ scale`.
    fn rows_at(&self, target: i32) -> IntMatrix {
        debug_assert!(target >= self.scale);
        self.basis()
            .scale(&p_pow(self.p, (target - self.scale) as u32))
    }

    /// Whether `other ⊆ self`.
    pub fn contains(&self, other: &Self) -> bool {
        let s = self.scale.max(other.scale);
        let mine = hermite_rows(&self.rows_at(s));
        let stacked = self
            .rows_at(s)
            .vstack(&other.rows_at(s))
            .expect("same dimension");
        hermite_rows(&stacked) == mine
    }

    /// `log_p [self : sub]`, for `sub ⊆ self`.
    pub fn index_exponent(&self, sub: &Self) -> Result<i64> {
        if !self.contains(sub) {
            return Err(Error::InvalidParameter("not a sublattice".into()));
        }
        let v = |l: &Self| -> i64 {
            valuation(&l.basis().determinant().expect("square"), l.p) as i64
                - l.dim as i64 * l.scale as i64
        };
        Ok(v(sub) - v(self))
    }

    pub fn sum(&self, other: &Self) -> Self {
        let s = self.scale.max(other.scale);
        let rows = self
            .rows_at(s)
            .vstack(&other.rows_at(s))
            .expect("same dimension");
        Self::from_rows(self.p, &rows, s).expect("full rank")
    }

    /// `γL` for an integer matrix acting on column vectors.
    pub fn transform(&self, gamma: &IntMatrix) -> Result<Self> {
        Self::from_rows(self.p, &self.basis().mul(&gamma.transpose())?, self.scale)
    }

    /// Gram matrix `⟨b_i, b_j⟩` of the integer basis; the true Gram is `p^{-2·scale}` times this.
    pub fn integer_gram(&self) -> IntMatrix {
        let b = self.basis();
        let j = integer_j(self.genus());
        b.mul(&j)
            .and_then(|m| m.mul(&b.transpose()))
            .expect("square")
    }

    /// `L* = {x : ⟨x, L⟩ ⊆ ℤ}`.
    pub fn dual(&self) -> Result<Self> {
        let j = integer_j(self.genus());
        let jbt = j.mul(&self.basis().transpose())?;
        let inv = RatMatrix::from_integer_matrix(&jbt)
            .inverse()
            .ok_or_else(|| Error::InvalidParameter("degenerate pairing on lattice".into()))?;
        let den = inv
            .as_slice()
            .iter()
            .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
        let t = valuation(&den, self.p);
        if p_pow(self.p, t) != den {
            return Err(Error::InvalidParameter(
                "denominator prime to p in dual".into(),
            ));
        }
        let rows = inv.map(|q| q.numer() * (&den / q.denom()));
        // (J Mᵀ)⁻¹ = p^{scale}·(J Bᵀ)⁻¹ = p^{scale - t}·rows
        Self::from_rows(self.p, &rows, t as i32 - self.scale)
    }

    /// `a` with `L* = p^a·L`, if `L` is self-dual up to homothety.
    pub fn self_duality_exponent(&self) -> Result<Option<i32>> {
        let d = self.dual()?;
        Ok((d.basis == self.basis).then(|| self.scale - d.scale))
    }

    /// Canonical generators of `p·L` modulo `p²`, for `pL₀ ⊆ L ⊆ p⁻¹L₀`.
    pub fn window_code(&self) -> Result<Vec<Vec<u32>>> {
        let g = self.genus();
        let l0 = Self::standard(g, self.p)?;
        if !(self.contains(&l0.scaled(1)) && l0.scaled(-1).contains(self)) {
            return Err(Error::WindowOverflow(format!(
                "lattice at scale {} outside pL0 ⊆ L ⊆ p^-1 L0",
                self.scale
            )));
        }
        let h = hermite_rows(&self.rows_at(1));
        let n = BigInt::from(self.p * self.p);
        Ok(h.as_slice()
            .chunks(self.dim)
            .map(|r| {
                r.iter()
                    .map(|x| x.mod_floor(&n).to_u32().expect("reduced"))
                    .collect()
            })
            .collect())
    }
}

/// Sign-correct `J` over ℤ.
pub fn integer_j(g: usize) -> IntMatrix {
    let mut j = IntMatrix::zeros(2 * g, 2 * g);
    for i in 0..g {
        j[(i, g + i)] = big(1);
        j[(g + i, i)] = big(-1);
    }
    j
}

/// Generators of Sp(2g, ℤ): `J` and `[[I, S], [0, I]]`, `S` elementary symmetric.
pub fn integer_sp_generators(g: usize) -> Vec<IntMatrix> {
    let mut gens = vec![integer_j(g)];
    for i in 0..g {
        for j in i..g {
            let mut m = IntMatrix::identity(2 * g);
            m[(i, g + j)] = big(1);
            m[(j, g + i)] = big(1);
            gens.push(m);
        }
    }
    gens
}

fn check_same(a: &Lattice, b: &Lattice) -> Result<()> {
    if a.p != b.p {
        return Err(Error::ModulusMismatch {
            left: a.p,
            right: b.p,
        });
    }
    if a.dim != b.dim {
        return Err(Error::GenusMismatch {
            left: a.genus(),
            right: b.genus(),
        });
    }
    Ok(())
}

/// `L ⊆ L'` with `[L' : L] = p^g`, `L` self-dual up to homothety (`L* = p^a L`) and
/// `L'/L` totally isotropic for `p^{a+1}⟨·,·⟩`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IsogenyPair {
    pub small: Lattice,
    pub large: Lattice,
}

impl IsogenyPair {
    pub fn new(small: Lattice, large: Lattice) -> Result<Self> {
        check_same(&small, &large)?;
        let pair = Self { small, large }.normalized();
        if !pair.is_valid()? {
            return Err(Error::InvalidParameter("invalid isogeny pair".into()));
        }
        Ok(pair)
    }

    /// `(L₀ ⊆ L₀ + p⁻¹·span(e_1, …, e_g))`.
    pub fn standard(g: usize, p: u32) -> Result<Self> {
        let l0 = Lattice::standard(g, p)?;
        Self::new(l0.clone(), l0.sum(&lagrangian_enlargement(g, p, g)?))
    }

    pub fn normalized(self) -> Self {
        let k = self.small.scale;
        Self {
            small: self.small.scaled(k),
            large: self.large.scaled(k),
        }
    }

    pub fn is_valid(&self) -> Result<bool> {
        let (m, m2) = (&self.small, &self.large);
        let g = m.genus() as i64;
        if !(m2.contains(m) && m.scaled(-1).contains(m2) && m2.index_exponent(m)? == g) {
            return Ok(false);
        }
        let Some(a) = m.self_duality_exponent()? else {
            return Ok(false);
        };
        Ok(pairing_integral(m2, a + 1))
    }

    pub fn transform(&self, gamma: &IntMatrix) -> Result<Self> {
        Ok(Self {
            small: self.small.transform(gamma)?,
            large: self.large.transform(gamma)?,
        }
        .normalized())
    }
}

/// Whether `p^k⟨L, L⟩ ⊆ ℤ`.
fn pairing_integral(l: &Lattice, k: i32) -> bool {
    let e = k - 2 * l.scale;
    let gram = l.integer_gram();
    if e >= 0 {
        return true;
    }
    let d = p_pow(l.p, (-e) as u32);
    gram.as_slice().iter().all(|x| (x % &d).is_zero())
}

/// `L₀ + p⁻¹·span(e_1, …, e_k)` as a lattice.
fn lagrangian_enlargement(g: usize, p: u32, k: usize) -> Result<Lattice> {
    let mut rows = IntMatrix::identity(2 * g).scale(&big(p as i64));
    for i in 0..k {
        rows[(i, i)] = big(1);
    }
    Lattice::from_rows(p, &rows, 1)
}

/// `w^P : (L ⊆ L') ↦ (L' ⊆ p⁻¹L)`, normalized.
pub fn al_pair(pair: &IsogenyPair) -> IsogenyPair {
    IsogenyPair {
        small: pair.large.clone(),
        large: pair.small.scaled(-1),
    }
    .normalized()
}

/// `L₀ ⊂ L₁ ⊂ … ⊂ L_g`, successive index `p`, `L_g ⊆ p⁻¹L₀`, with the self-duality
/// `L₀* = p^a·L₀`, `L_g* = p^{a+1}·L_g`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ChainOfLattices {
    pub lattices: Vec<Lattice>,
}

impl ChainOfLattices {
    pub fn new(lattices: Vec<Lattice>) -> Result<Self> {
        let c = Self { lattices }.normalized();
        if !c.is_valid()? {
            return Err(Error::InvalidParameter("invalid lattice chain".into()));
        }
        Ok(c)
    }

    pub fn standard(g: usize, p: u32) -> Result<Self> {
        let l0 = Lattice::standard(g, p)?;
        let lattices = (0..=g)
            .map(|k| {
                if k == 0 {
                    Ok(l0.clone())
                } else {
                    lagrangian_enlargement(g, p, k)
                }
            })
            .collect::<Result<_>>()?;
        Self::new(lattices)
    }

    pub fn genus(&self) -> usize {
        self.lattices.len() - 1
    }

    pub fn base(&self) -> &Lattice {
        &self.lattices[0]
    }

    pub fn top(&self) -> &Lattice {
        &self.lattices[self.genus()]
    }

    pub fn normalized(self) -> Self {
        let k = self.lattices[0].scale;
        Self {
            lattices: self.lattices.into_iter().map(|l| l.scaled(k)).collect(),
        }
    }

    pub fn is_valid(&self) -> Result<bool> {
        let g = self.genus();
        if g == 0 || self.lattices.iter().any(|l| l.genus() != g) {
            return Ok(false);
        }
        for w in self.lattices.windows(2) {
            if !(w[1].contains(&w[0]) && w[1].index_exponent(&w[0])? == 1) {
                return Ok(false);
            }
        }
        if !self.base().scaled(-1).contains(self.top()) {
            return Ok(false);
        }
        let (Some(a), Some(b)) = (
            self.base().self_duality_exponent()?,
            self.top().self_duality_exponent()?,
        ) else {
            return Ok(false);
        };
        Ok(b == a + 1)
    }

    /// `L_i*` for each member; `p⁻¹L_i*` is `L_{2g−i}` of the periodic chain.
    pub fn duals(&self) -> Result<Vec<Lattice>> {
        self.lattices.iter().map(Lattice::dual).collect()
    }

    pub fn to_pair(&self) -> IsogenyPair {
        IsogenyPair {
            small: self.base().clone(),
            large: self.top().clone(),
        }
        .normalized()
    }

    pub fn transform(&self, gamma: &IntMatrix) -> Result<Self> {
        Ok(Self {
            lattices: self
                .lattices
                .iter()
                .map(|l| l.transform(gamma))
                .collect::<Result<_>>()?,
        }
        .normalized())
    }
}

/// `w^B : (L₀ ⊂ … ⊂ L_g) ↦ (L_g* ⊂ … ⊂ L₀*)`, normalized.
pub fn al_chain(chain: &ChainOfLattices) -> Result<ChainOfLattices> {
    let mut lattices = chain.duals()?;
    lattices.reverse();
    Ok(ChainOfLattices { lattices }.normalized())
}

fn orbit<T: Ord + Clone>(
    start: T,
    gens: &[IntMatrix],
    act: impl Fn(&T, &IntMatrix) -> Result<T>,
    cap: usize,
) -> Result<Vec<T>> {
    let mut seen = BTreeSet::from([start.clone()]);
    let mut queue = VecDeque::from([start]);
    while let Some(x) = queue.pop_front() {
        for m in gens {
            let y = act(&x, m)?;
            if seen.insert(y.clone()) {
                if seen.len() > cap {
                    return Err(Error::EnumerationTooLarge {
                        what: "lattice orbit".into(),
                        size: seen.len() as u128,
                        cap: cap as u128,
                    });
                }
                queue.push_back(y);
            }
        }
    }
    Ok(seen.into_iter().collect())
}

/// Pairs with `L = L₀`, as the Sp(2g, ℤ)-orbit of the standard pair.
pub fn pairs_at_standard(g: usize, p: u32, cap: usize) -> Result<Vec<IsogenyPair>> {
    orbit(
        IsogenyPair::standard(g, p)?,
        &integer_sp_generators(g),
        |x, m| x.transform(m),
        cap,
    )
}

/// Chains with first member `L₀`, as the Sp(2g, ℤ)-orbit of the standard chain.
pub fn chains_at_standard(g: usize, p: u32, cap: usize) -> Result<Vec<ChainOfLattices>> {
    orbit(
        ChainOfLattices::standard(g, p)?,
        &integer_sp_generators(g),
        |x, m| x.transform(m),
        cap,
    )
}

/// The pairs at `L₀` together with their Atkin–Lehner images.
pub fn enumerate_pairs(g: usize, p: u32, cap: usize) -> Result<Vec<IsogenyPair>> {
    let base = pairs_at_standard(g, p, cap)?;
    let mut all: BTreeSet<IsogenyPair> = base.iter().map(al_pair).collect();
    all.extend(base);
    Ok(all.into_iter().collect())
}

/// The chains at `L₀` together with their Atkin–Lehner images.
pub fn enumerate_chains(g: usize, p: u32, cap: usize) -> Result<Vec<ChainOfLattices>> {
    let base = chains_at_standard(g, p, cap)?;
    let mut all = BTreeSet::new();
    for c in &base {
        all.insert(al_chain(c)?);
    }
    all.extend(base);
    Ok(all.into_iter().collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvolutionReport {
    pub g: usize,
    pub p: u32,
    pub pairs: usize,
    pub pairs_at_standard: usize,
    pub pair_involution: bool,
    pub pair_fixed_points: usize,
    pub chains: usize,
    pub chains_at_standard: usize,
    pub chain_involution: bool,
    pub chain_validity: bool,
    /// `#pairs at L₀` and `#chains at L₀` against `#P-levels` and `#B-levels`
    pub counts_match_levels: bool,
}

impl InvolutionReport {
    pub fn passed(&self) -> bool {
        self.pair_involution
            && self.chain_involution
            && self.chain_validity
            && self.counts_match_levels
    }
}

/// `al_pair` and `al_chain` are involutions on the full enumerations, and preserve validity.
pub fn involution_check(g: usize, p: u32, cap: usize) -> Result<InvolutionReport> {
    let pairs = enumerate_pairs(g, p, cap)?;
    let pair_set: BTreeSet<&IsogenyPair> = pairs.iter().collect();
    let mut pair_involution = true;
    let mut pair_fixed_points = 0;
    for x in &pairs {
        let y = al_pair(x);
        pair_involution &= pair_set.contains(&y) && al_pair(&y) == *x && y.is_valid()?;
        pair_fixed_points += usize::from(y == *x);
    }
    let chains = enumerate_chains(g, p, cap)?;
    let chain_set: BTreeSet<&ChainOfLattices> = chains.iter().collect();
    let mut chain_involution = true;
    let mut chain_validity = true;
    for c in &chains {
        let d = al_chain(c)?;
        chain_validity &= d.is_valid()?;
        chain_involution &= chain_set.contains(&d) && al_chain(&d)? == *c;
    }
    let n_pairs0 = pairs_at_standard(g, p, cap)?.len();
    let n_chains0 = chains_at_standard(g, p, cap)?.len();
    let counts_match_levels = n_pairs0
        == enumerate_structures(&StructureKind::P, g, p, cap as u128)?.len()
        && n_chains0 == enumerate_structures(&StructureKind::B, g, p, cap as u128)?.len();
    Ok(InvolutionReport {
        g,
        p,
        pairs: pairs.len(),
        pairs_at_standard: n_pairs0,
        pair_involution,
        pair_fixed_points,
        chains: chains.len(),
        chains_at_standard: n_chains0,
        chain_involution,
        chain_validity,
        counts_match_levels,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SquareReport {
    pub g: usize,
    pub p: u32,
    pub chains: usize,
    pub failures: usize,
}

impl SquareReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// `to_pair ∘ al_chain = al_pair ∘ to_pair` on every enumerated chain.
pub fn square_commutes(g: usize, p: u32, cap: usize) -> Result<SquareReport> {
    let chains = enumerate_chains(g, p, cap)?;
    let mut failures = 0;
    for c in &chains {
        if al_chain(c)?.to_pair() != al_pair(&c.to_pair()) {
            failures += 1;
        }
    }
    Ok(SquareReport {
        g,
        p,
        chains: chains.len(),
        failures,
    })
}

/// Coordinates of `p⁻¹M/M` in a symplectic basis for the reduced form, `M` the base of a chain.
#[derive(Debug, Clone)]
struct Frame {
    p: u32,
    g: usize,
    base: Lattice,
    /// rows: symplectic basis of `p⁻¹M/M` in base coordinates
    to_base: ModMatrix,
    from_base: ModMatrix,
}

impl Frame {
    fn new(base: &Lattice) -> Result<Self> {
        let p = base.p;
        let g = base.genus();
        let a = base.self_duality_exponent()?.ok_or_else(|| {
            Error::InvalidParameter("chain base is not self-dual up to homothety".into())
        })?;
        // p^a·Gram(M) = p^{a - 2s}·B J Bᵀ, integral and unimodular
        let e = a - 2 * base.scale;
        let gram = base.integer_gram();
        let scaled: Vec<BigInt> = gram
            .as_slice()
            .iter()
            .map(|x| {
                if e >= 0 {
                    x * p_pow(p, e as u32)
                } else {
                    x / p_pow(p, (-e) as u32)
                }
            })
            .collect();
        let form = ModMatrix::from_int_matrix(&IntMatrix::from_vec(2 * g, 2 * g, scaled)?, p)?;
        let to_base = symplectic_basis(&form, g, p)?;
        let from_base = to_base.inverse()?;
        Ok(Self {
            p,
            g,
            base: base.clone(),
            to_base,
            from_base,
        })
    }

    /// `M + p⁻¹·span(rows·B)` for coordinate rows in the base basis.
    fn lattice_of(&self, coords: &[Vec<u32>]) -> Result<Lattice> {
        let b = self.base.basis();
        let mut rows = b.scale(&big(self.p as i64));
        for c in coords {
            let v = IntMatrix::from_vec(1, 2 * self.g, c.iter().map(|&x| big(x as i64)).collect())?;
            rows = rows.vstack(&v.mul(&b)?)?;
        }
        Lattice::from_rows(self.p, &rows, self.base.scale + 1)
    }

    /// Base coordinates mod `p` of a lattice `M ⊆ L ⊆ p⁻¹M`, as spanning rows.
    fn coords_of(&self, l: &Lattice) -> Result<Vec<Vec<u32>>> {
        let b_inv = RatMatrix::from_integer_matrix(&self.base.basis())
            .inverse()
            .ok_or_else(|| Error::InvalidParameter("singular basis".into()))?;
        // x = p^{-1-s}·c·B  ⇒  c = p^{1+s}·x·B⁻¹
        let shift = self.base.scale + 1 - l.scale;
        let factor = if shift >= 0 {
            BigRational::from_integer(p_pow(self.p, shift as u32))
        } else {
            BigRational::new(BigInt::one(), p_pow(self.p, (-shift) as u32))
        };
        let c = RatMatrix::from_integer_matrix(&l.basis())
            .mul(&b_inv)?
            .scale(&factor);
        let pb = BigInt::from(self.p);
        c.as_slice()
            .chunks(2 * self.g)
            .map(|r| {
                r.iter()
                    .map(|q| {
                        if !q.is_integer() {
                            return Err(Error::WindowOverflow("lattice outside p^-1 M".into()));
                        }
                        Ok(q.to_integer().mod_floor(&pb).to_u32().expect("reduced"))
                    })
                    .collect()
            })
            .collect()
    }

    fn to_standard(&self, c: &[u32]) -> Vec<u32> {
        // c = c'·P  ⇒  c' = c·P⁻¹, as a column vector (P⁻¹)ᵀ c
        self.from_base.transpose().mul_vec(c)
    }

    fn from_standard(&self, c: &[u32]) -> Vec<u32> {
        self.to_base.transpose().mul_vec(c)
    }
}

/// Rows `P` with `P·form·Pᵀ = J` over `F_p`.
fn symplectic_basis(form: &ModMatrix, g: usize, p: u32) -> Result<ModMatrix> {
    let n = 2 * g;
    let pair = |x: &[u32], y: &[u32]| -> u32 {
        let fy = form.mul_vec(y);
        (x.iter()
            .zip(&fy)
            .map(|(&a, &b)| a as u64 * b as u64)
            .sum::<u64>()
            % p as u64) as u32
    };
    let mut pool: Vec<Vec<u32>> = (0..n)
        .map(|i| {
            let mut v = vec![0; n];
            v[i] = 1;
            v
        })
        .collect();
    let mut es = Vec::new();
    let mut fs = Vec::new();
    while let Some(v) = pool.pop() {
        if v.iter().all(|&x| x == 0) {
            continue;
        }
        let Some(k) = pool.iter().position(|w| pair(&v, w) != 0) else {
            return Err(Error::InvalidParameter("degenerate form".into()));
        };
        let w0 = pool.remove(k);
        let s = inv_mod(pair(&v, &w0), p).expect("nonzero mod prime");
        let w: Vec<u32> = w0
            .iter()
            .map(|&x| (x as u64 * s as u64 % p as u64) as u32)
            .collect();
        for u in pool.iter_mut() {
            let (uw, uv) = (pair(u, &w), pair(u, &v));
            for i in 0..n {
                let t = u[i] as u64 + (p - uw) as u64 * v[i] as u64 + uv as u64 * w[i] as u64;
                u[i] = (t % p as u64) as u32;
            }
        }
        es.push(v);
        fs.push(w);
    }
    if es.len() != g {
        return Err(Error::InvalidParameter("degenerate form".into()));
    }
    let data: Vec<u32> = es.into_iter().chain(fs).flatten().collect();
    ModMatrix::from_residues(p, n, n, data)
}

/// A chain with a splitting of `L_g/L_0` into `2g` lines (the T-refinement); the lines
/// are stored as lattices `L_0 + ℓ`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DecoratedChain {
    pub chain: ChainOfLattices,
    pub lines: Vec<Lattice>,
}

/// Enumerates decorations and Weyl moves of chains.
pub struct WeylMover {
    module: SympModule,
    over: HashMap<LevelStructure, Vec<TLevel>>,
}

impl WeylMover {
    pub fn new(g: usize, p: u32, cap: u128) -> Result<Self> {
        let module = SympModule::new(g, p)?;
        let mut over: HashMap<LevelStructure, Vec<TLevel>> = HashMap::new();
        for s in enumerate_structures(&StructureKind::T, g, p, cap)? {
            let LevelStructure::T(t) = &s else {
                unreachable!("T enumeration yields T-levels")
            };
            over.entry(project(&module, &s, &StructureKind::B)?)
                .or_default()
                .push(t.clone());
        }
        Ok(Self { module, over })
    }

    fn flag_of(&self, frame: &Frame, chain: &ChainOfLattices) -> Result<LevelStructure> {
        let g = chain.genus();
        let flag = (1..=g)
            .map(|i| {
                let rows = frame.coords_of(&chain.lattices[i])?;
                let std: Vec<Vec<u32>> = rows.iter().map(|r| frame.to_standard(r)).collect();
                Ok(self.module.span(&std))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(LevelStructure::B(BLevel { flag }))
    }

    fn chain_of(&self, frame: &Frame, flag: &BLevel) -> Result<ChainOfLattices> {
        let mut lattices = vec![frame.base.clone()];
        for h in &flag.flag {
            let rows: Vec<Vec<u32>> = self
                .module
                .generators(h)
                .into_iter()
                .map(|c| frame.from_standard(&self.module.decode(c)))
                .collect();
            lattices.push(frame.lattice_of(&rows)?);
        }
        Ok(ChainOfLattices { lattices }.normalized())
    }

    fn decorations_in_frame(&self, chain: &ChainOfLattices) -> Result<(Frame, Vec<TLevel>)> {
        let frame = Frame::new(chain.base())?;
        let flag = self.flag_of(&frame, chain)?;
        let ts = self.over.get(&flag).cloned().unwrap_or_default();
        Ok((frame, ts))
    }

    pub fn decorations(&self, chain: &ChainOfLattices) -> Result<Vec<DecoratedChain>> {
        let (frame, ts) = self.decorations_in_frame(chain)?;
        ts.iter()
            .map(|t| {
                let lines = t
                    .lines
                    .iter()
                    .map(|l| {
                        let rows: Vec<Vec<u32>> = self
                            .module
                            .generators(l)
                            .into_iter()
                            .map(|c| frame.from_standard(&self.module.decode(c)))
                            .collect();
                        Ok(frame.lattice_of(&rows)?.scaled(chain.base().scale))
                    })
                    .collect::<Result<_>>()?;
                Ok(DecoratedChain {
                    chain: chain.clone(),
                    lines,
                })
            })
            .collect()
    }

    /// `V^σ(c)`: the chains underlying `v^σ(d)` over all decorations `d` of `c`.
    pub fn move_set(
        &self,
        sigma: &WeylElement,
        chain: &ChainOfLattices,
    ) -> Result<BTreeSet<ChainOfLattices>> {
        Ok(self
            .move_sets(std::slice::from_ref(sigma), chain)?
            .remove(0))
    }

    /// `V^σ(c)` for several `σ`, sharing the decoration search.
    pub fn move_sets(
        &self,
        sigmas: &[WeylElement],
        chain: &ChainOfLattices,
    ) -> Result<Vec<BTreeSet<ChainOfLattices>>> {
        let (frame, ts) = self.decorations_in_frame(chain)?;
        let mut cache: HashMap<LevelStructure, ChainOfLattices> = HashMap::new();
        sigmas
            .iter()
            .map(|sigma| {
                ts.iter()
                    .map(|t| {
                        let moved = LevelStructure::T(weyl_twist(sigma, t));
                        let flag = project(&self.module, &moved, &StructureKind::B)?;
                        if let Some(c) = cache.get(&flag) {
                            return Ok(c.clone());
                        }
                        let LevelStructure::B(b) = &flag else {
                            unreachable!("B projection")
                        };
                        let c = self.chain_of(&frame, b)?;
                        cache.insert(flag, c.clone());
                        Ok(c)
                    })
                    .collect()
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LatticeData {
    pub scale: i32,
    pub basis: Vec<Vec<i64>>,
}

impl From<&Lattice> for LatticeData {
    fn from(l: &Lattice) -> Self {
        Self {
            scale: l.scale,
            basis: l.basis_rows(),
        }
    }
}

fn chain_data(c: &ChainOfLattices) -> Vec<LatticeData> {
    c.lattices.iter().map(LatticeData::from).collect()
}

/// A chain `c` with `w(V^σ(c)) ≠ V^σ(w(c))`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NonCommutationWitness {
    pub sigma: Vec<usize>,
    pub chain: Vec<LatticeData>,
    /// `al_chain` applied to each member of `V^σ(c)`
    pub al_after_move: Vec<Vec<LatticeData>>,
    /// `V^σ(al_chain(c))`
    pub move_after_al: Vec<Vec<LatticeData>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SigmaOutcome {
    pub sigma: WeylElement,
    /// σ' with `al ∘ V^σ = V^{σ'} ∘ al` on every chain
    pub partners: Vec<WeylElement>,
    pub commutes: bool,
    pub witness: Option<NonCommutationWitness>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NonCommutationReport {
    pub g: usize,
    pub p: u32,
    pub chains: usize,
    pub outcomes: Vec<SigmaOutcome>,
}

impl NonCommutationReport {
    pub fn witness_found(&self) -> bool {
        self.outcomes.iter().any(|o| o.witness.is_some())
    }

    pub fn identity_commutes(&self) -> bool {
        self.outcomes
            .iter()
            .filter(|o| o.sigma.is_identity())
            .all(|o| o.commutes)
    }
}

/// Exhaustive comparison of `al_chain ∘ V^σ` with `V^{σ'} ∘ al_chain` over all chains
/// and all `σ, σ' ∈ W`.
pub fn al_weyl_noncommutation(g: usize, p: u32, cap: usize) -> Result<NonCommutationReport> {
    let chains = enumerate_chains(g, p, cap)?;
    let mover = WeylMover::new(g, p, cap as u128)?;
    let ws = all_elements(g);
    let al: Vec<ChainOfLattices> = chains.iter().map(al_chain).collect::<Result<_>>()?;
    let mut moves: BTreeMap<(usize, usize), BTreeSet<ChainOfLattices>> = BTreeMap::new();
    let index: HashMap<&ChainOfLattices, usize> =
        chains.iter().enumerate().map(|(i, c)| (c, i)).collect();
    for (ci, c) in chains.iter().enumerate() {
        for (wi, set) in mover.move_sets(&ws, c)?.into_iter().enumerate() {
            moves.insert((wi, ci), set);
        }
    }
    let mut outcomes = Vec::new();
    for (wi, w) in ws.iter().enumerate() {
        let lhs: Vec<BTreeSet<ChainOfLattices>> = (0..chains.len())
            .map(|ci| {
                moves[&(wi, ci)]
                    .iter()
                    .map(|d| {
                        index
                            .get(d)
                            .map_or_else(|| al_chain(d), |&k| Ok(al[k].clone()))
                    })
                    .collect::<Result<_>>()
            })
            .collect::<Result<_>>()?;
        let rhs =
            |wj: usize, ci: usize| -> &BTreeSet<ChainOfLattices> { &moves[&(wj, index[&al[ci]])] };
        let partners: Vec<WeylElement> = ws
            .iter()
            .enumerate()
            .filter(|(wj, _)| (0..chains.len()).all(|ci| lhs[ci] == *rhs(*wj, ci)))
            .map(|(_, v)| v.clone())
            .collect();
        let witness = (0..chains.len())
            .find(|&ci| lhs[ci] != *rhs(wi, ci))
            .map(|ci| NonCommutationWitness {
                sigma: w.reduced_word(),
                chain: chain_data(&chains[ci]),
                al_after_move: lhs[ci].iter().map(chain_data).collect(),
                move_after_al: rhs(wi, ci).iter().map(chain_data).collect(),
            });
        outcomes.push(SigmaOutcome {
            sigma: w.clone(),
            commutes: witness.is_none(),
            partners,
            witness,
        });
    }
    Ok(NonCommutationReport {
        g,
        p,
        chains: chains.len(),
        outcomes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weyl::GeneratorSet;
    use proptest::prelude::*;

    const CAP: usize = 100_000;

    fn random_gamma(g: usize, word: &[usize]) -> IntMatrix {
        let gens = integer_sp_generators(g);
        word.iter().fold(IntMatrix::identity(2 * g), |acc, &i| {
            acc.mul(&gens[i % gens.len()]).unwrap()
        })
    }

    #[test]
    fn standard_lattice_is_self_dual() {
        for (g, p) in [(1, 2), (2, 3), (3, 5)] {
            let l0 = Lattice::standard(g, p).unwrap();
            assert_eq!(l0.dual().unwrap(), l0);
            assert_eq!(l0.scaled(1).dual().unwrap(), l0.scaled(-1));
            assert_eq!(l0.self_duality_exponent().unwrap(), Some(0));
            assert_eq!(l0.scaled(1).self_duality_exponent().unwrap(), Some(-2));
        }
    }

    #[test]
    fn containment_and_index() {
        let l0 = Lattice::standard(2, 3).unwrap();
        let big = l0.scaled(-1);
        assert!(big.contains(&l0));
        assert!(!l0.contains(&big));
        assert_eq!(big.index_exponent(&l0).unwrap(), 4);
        let mid = lagrangian_enlargement(2, 3, 1).unwrap();
        assert_eq!(mid.index_exponent(&l0).unwrap(), 1);
        assert_eq!(big.index_exponent(&mid).unwrap(), 3);
        assert!(mid.index_exponent(&big).is_err());
    }

    #[test]
    fn window_codes() {
        let l0 = Lattice::standard(1, 3).unwrap();
        assert_eq!(l0.window_code().unwrap(), vec![vec![3, 0], vec![0, 3]]);
        assert_eq!(
            l0.scaled(-1).window_code().unwrap(),
            vec![vec![1, 0], vec![0, 1]]
        );
        assert!(matches!(
            l0.scaled(2).window_code(),
            Err(Error::WindowOverflow(_))
        ));
        assert!(l0.scaled(-2).window_code().is_err());
    }

    #[test]
    fn dual_is_an_involution_on_chain_members() {
        for c in chains_at_standard(2, 3, CAP).unwrap().iter().step_by(7) {
            for l in &c.lattices {
                assert_eq!(&l.dual().unwrap().dual().unwrap(), l);
            }
        }
    }

    #[test]
    fn periodic_self_duality() {
        // L_{2g-i} = p⁻¹·L_i* extends the chain to L_0 ⊂ … ⊂ L_{2g} = p⁻¹L_0, step index p
        for (g, p) in [(1, 2), (2, 2), (2, 3)] {
            for c in chains_at_standard(g, p, CAP).unwrap() {
                let duals = c.duals().unwrap();
                let mut ext = c.lattices.clone();
                ext.extend((0..g).rev().map(|i| duals[i].scaled(-1)));
                assert_eq!(duals[g].scaled(-1), c.lattices[g]);
                assert_eq!(ext[2 * g], c.base().scaled(-1));
                for w in ext.windows(2) {
                    assert_eq!(w[1].index_exponent(&w[0]).unwrap(), 1);
                }
            }
        }
    }

    #[test]
    fn pair_counts_match_lagrangians() {
        for (g, p, n) in [(1, 2, 3), (1, 3, 4), (2, 2, 15), (2, 3, 40)] {
            let pairs = pairs_at_standard(g, p, CAP).unwrap();
            assert_eq!(pairs.len(), n);
            assert!(pairs.iter().all(|x| x.is_valid().unwrap()));
        }
        assert_eq!(chains_at_standard(2, 2, CAP).unwrap().len(), 45);
    }

    #[test]
    fn al_on_standard_pair() {
        let x = IsogenyPair::standard(2, 2).unwrap();
        let y = al_pair(&x);
        assert_ne!(x, y);
        assert_eq!(y.large, Lattice::standard(2, 2).unwrap());
        assert_eq!(al_pair(&y), x);
    }

    #[test]
    fn involutions_small() {
        for (g, p) in [(1, 2), (1, 3), (2, 2)] {
            let r = involution_check(g, p, CAP).unwrap();
            assert!(r.passed(), "{r:?}");
            assert_eq!(r.pair_fixed_points, 0);
        }
    }

    #[test]
    fn g1_chain_is_pair() {
        for c in enumerate_chains(1, 3, CAP).unwrap() {
            assert_eq!(al_chain(&c).unwrap().to_pair(), al_pair(&c.to_pair()));
            assert_eq!(c.lattices.len(), 2);
        }
    }

    #[test]
    fn square_small() {
        for (g, p, n) in [(1, 2, 6), (2, 2, 90)] {
            let r = square_commutes(g, p, CAP).unwrap();
            assert!(r.passed());
            assert_eq!(r.chains, n);
        }
    }

    #[test]
    fn decorations_generate_graded_pieces() {
        let mover = WeylMover::new(2, 2, 2_000_000).unwrap();
        for c in enumerate_chains(2, 2, CAP).unwrap().iter().step_by(5) {
            let ds = mover.decorations(c).unwrap();
            assert_eq!(ds.len(), 16);
            for d in &ds {
                assert_eq!(d.lines[0], c.lattices[1]);
                assert_eq!(d.lines[0].sum(&d.lines[1]), c.lattices[2]);
                let everything = d
                    .lines
                    .iter()
                    .skip(1)
                    .fold(d.lines[0].clone(), |a, l| a.sum(l));
                assert_eq!(everything, c.base().scaled(-1));
            }
            let id = mover.move_set(&WeylElement::identity(2), c).unwrap();
            assert_eq!(id, BTreeSet::from([c.clone()]));
        }
    }

    #[test]
    fn noncommutation_g1() {
        for p in [2, 3] {
            let r = al_weyl_noncommutation(1, p, CAP).unwrap();
            assert!(r.identity_commutes());
            let flip = r.outcomes.iter().find(|o| !o.sigma.is_identity()).unwrap();
            assert!(flip.witness.is_some(), "{r:?}");
            assert!(flip.partners.is_empty());
        }
    }

    #[test]
    fn noncommutation_g2_reflection_partners() {
        let r = al_weyl_noncommutation(2, 2, CAP).unwrap();
        let s1 = WeylElement::simple(2, 1);
        let o = r.outcomes.iter().find(|o| o.sigma == s1).unwrap();
        assert_eq!(o.partners, vec![s1.clone()]);
        let s2 = GeneratorSet::new(2).reflections()[1].clone();
        let o2 = r.outcomes.iter().find(|o| o.sigma == s2).unwrap();
        assert!(o2.witness.is_some());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn dual_commutes_with_sp_action(word in proptest::collection::vec(0usize..4, 0..8), k in 0usize..=2, shift in -2i32..=2) {
            let (g, p) = (2, 3);
            let gamma = random_gamma(g, &word);
            let l = lagrangian_enlargement(g, p, k).unwrap().scaled(shift);
            let lhs = l.transform(&gamma).unwrap().dual().unwrap();
            let rhs = l.dual().unwrap().transform(&gamma).unwrap();
            prop_assert_eq!(&lhs, &rhs);
            prop_assert_eq!(lhs.dual().unwrap(), l.transform(&gamma).unwrap());
        }

        #[test]
        fn index_is_multiplicative(word in proptest::collection::vec(0usize..4, 0..8), k in 0usize..=2) {
            let g = 2;
            let gamma = random_gamma(g, &word);
            let l0 = Lattice::standard(g, 2).unwrap();
            let mid = lagrangian_enlargement(g, 2, k).unwrap().transform(&gamma).unwrap();
            let top = l0.scaled(-1);
            prop_assert_eq!(
                top.index_exponent(&l0).unwrap(),
                top.index_exponent(&mid).unwrap() + mid.index_exponent(&l0).unwrap()
            );
        }
    }
}
