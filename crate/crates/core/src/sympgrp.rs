//! GSp(2g) and Sp(2g) over ℤ/nℤ.
//!
//! Column-vector convention throughout: a matrix `m` acts by `x ↦ m·x`, and the
//! basis is ordered `e_1..e_g, f_1..f_g` with `⟨e_i, f_j⟩ = δ_ij`.

use std::collections::{HashSet, VecDeque};

use crate::error::{Error, Result};
use crate::finalg::{factorize, inv_mod, is_prime, ModMatrix};

/// Default bound on the size of any exhaustive enumeration.
pub const DEFAULT_CAP: u128 = 2_000_000;

/// `J = [[0, I_g], [−I_g, 0]]` modulo n.
pub fn standard_j(g: usize, n: u32) -> ModMatrix {
    let mut j = ModMatrix::zeros(n, 2 * g, 2 * g);
    for i in 0..g {
        j.set(i, g + i, 1);
        j.set_signed(g + i, i, -1);
    }
    j
}

/// The standard alternating form on (ℤ/nℤ)^{2g}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymplecticForm {
    g: usize,
    j: ModMatrix,
}

impl SymplecticForm {
    pub fn new(g: usize, n: u32) -> Self {
        Self {
            g,
            j: standard_j(g, n),
        }
    }

    pub fn genus(&self) -> usize {
        self.g
    }

    pub fn modulus(&self) -> u32 {
        self.j.modulus()
    }

    pub fn matrix(&self) -> &ModMatrix {
        &self.j
    }

    /// `⟨x, y⟩ = xᵀ J y = u·w − v·z` for `x = (u, v)`, `y = (z, w)`.
    pub fn pair(&self, x: &[u32], y: &[u32]) -> u32 {
        pairing(self.g, self.modulus(), x, y)
    }
}

pub(crate) fn pairing(g: usize, n: u32, x: &[u32], y: &[u32]) -> u32 {
    let n64 = n as u64;
    let mut pos = 0u64;
    let mut neg = 0u64;
    for i in 0..g {
        pos += x[i] as u64 * y[g + i] as u64 % n64;
        neg += x[g + i] as u64 * y[i] as u64 % n64;
    }
    ((pos % n64 + n64 - neg % n64) % n64) as u32
}

/// Returns λ if `mᵀ J m = λ J` with λ a unit mod n, `None` if `m` is not a similitude.
pub fn multiplier_of(m: &ModMatrix, g: usize) -> Result<Option<u32>> {
    if m.rows() != 2 * g || m.cols() != 2 * g {
        return Err(Error::DimensionMismatch(format!(
            "expected {0}x{0}, got {1}x{2}",
            2 * g,
            m.rows(),
            m.cols()
        )));
    }
    let n = m.modulus();
    let j = standard_j(g, n);
    let x = m.transpose().mul_unchecked(&j).mul_unchecked(m);
    let lambda = x.get(0, g);
    if x != j.scale(lambda) || inv_mod(lambda, n).is_none() {
        return Ok(None);
    }
    Ok(Some(lambda))
}

/// An element of GSp(2g, ℤ/nℤ) with its multiplier cached.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymplecticElement {
    mat: ModMatrix,
    multiplier: u32,
}

impl SymplecticElement {
    /// Validates membership in GSp and caches the multiplier.
    pub fn new(mat: ModMatrix) -> Result<Self> {
        if !mat.is_square() || !mat.rows().is_multiple_of(2) {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} is not 2g x 2g",
                mat.rows(),
                mat.cols()
            )));
        }
        let g = mat.rows() / 2;
        match multiplier_of(&mat, g)? {
            Some(multiplier) => Ok(Self { mat, multiplier }),
            None => Err(Error::InvalidParameter(format!(
                "matrix is not a symplectic similitude: {mat:?}"
            ))),
        }
    }

    /// Trusted constructor for matrices already known to lie in Sp.
    pub(crate) fn from_sp_unchecked(mat: ModMatrix) -> Self {
        debug_assert_eq!(
            multiplier_of(&mat, mat.rows() / 2).unwrap(),
            Some(1 % mat.modulus())
        );
        Self {
            multiplier: 1 % mat.modulus(),
            mat,
        }
    }

    pub fn identity(g: usize, n: u32) -> Self {
        Self::from_sp_unchecked(ModMatrix::identity(n, 2 * g))
    }

    pub fn matrix(&self) -> &ModMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ModMatrix {
        self.mat
    }

    pub fn multiplier(&self) -> u32 {
        self.multiplier
    }

    pub fn genus(&self) -> usize {
        self.mat.rows() / 2
    }

    pub fn modulus(&self) -> u32 {
        self.mat.modulus()
    }

    pub fn is_sp(&self) -> bool {
        self.multiplier == 1 % self.modulus()
    }

    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        let mat = self.mat.mul(&rhs.mat)?;
        let n = self.modulus() as u64;
        Ok(Self {
            mat,
            multiplier: (self.multiplier as u64 * rhs.multiplier as u64 % n) as u32,
        })
    }

    /// `m⁻¹ = λ⁻¹ J⁻¹ mᵀ J`, no elimination needed.
    pub fn inverse(&self) -> Self {
        let g = self.genus();
        let n = self.modulus();
        let linv = inv_mod(self.multiplier, n).expect("multiplier is a unit");
        let j = standard_j(g, n);
        let mat = j
            .neg()
            .mul_unchecked(&self.mat.transpose())
            .mul_unchecked(&j)
            .scale(linv);
        Self {
            mat,
            multiplier: linv,
        }
    }
}

/// `p^{g²} ∏_{i=1..g} (p^{2i} − 1)`, the order of Sp(2g, F_p).
pub fn group_order(g: usize, p: u32) -> u128 {
    let p = p as u128;
    let mut order = p.pow((g * g) as u32);
    for i in 1..=g {
        order *= p.pow(2 * i as u32) - 1;
    }
    order
}

/// Order of Sp(2g, ℤ/nℤ): multiplicative over prime powers, and the kernel of
/// reduction mod p from p^k to p^{k−1} has order p^{dim Sp} = p^{g(2g+1)}.
pub fn group_order_mod(g: usize, n: u32) -> u128 {
    factorize(n)
        .into_iter()
        .map(|(p, k)| group_order(g, p) * (p as u128).pow((k - 1) * (g * (2 * g + 1)) as u32))
        .product()
}

/// Packs a square matrix over ℤ/nℤ into a single integer (radix n, row-major).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Codec {
    modulus: u32,
    dim: usize,
}

impl Codec {
    pub fn new(modulus: u32, dim: usize) -> Result<Self> {
        let bits = (dim * dim) as f64 * (modulus as f64).log2();
        if modulus < 2 || bits >= 127.0 {
            return Err(Error::InvalidParameter(format!(
                "cannot pack {dim}x{dim} matrices mod {modulus} into 128 bits"
            )));
        }
        Ok(Self { modulus, dim })
    }

    pub fn encode(&self, m: &ModMatrix) -> u128 {
        debug_assert_eq!(m.modulus(), self.modulus);
        let n = self.modulus as u128;
        m.entries()
            .iter()
            .rev()
            .fold(0u128, |acc, &x| acc * n + x as u128)
    }

    pub fn decode(&self, mut code: u128) -> ModMatrix {
        let n = self.modulus as u128;
        let mut data = Vec::with_capacity(self.dim * self.dim);
        for _ in 0..self.dim * self.dim {
            data.push((code % n) as u32);
            code /= n;
        }
        ModMatrix::from_residues(self.modulus, self.dim, self.dim, data).expect("valid shape")
    }
}

/// A finite set of square matrices over ℤ/nℤ, stored as sorted codes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElementSet {
    codec: Codec,
    codes: Vec<u128>,
}

impl ElementSet {
    pub fn from_codes(codec: Codec, mut codes: Vec<u128>) -> Self {
        codes.sort_unstable();
        codes.dedup();
        Self { codec, codes }
    }

    pub fn from_matrices<'a>(
        modulus: u32,
        dim: usize,
        mats: impl IntoIterator<Item = &'a ModMatrix>,
    ) -> Result<Self> {
        let codec = Codec::new(modulus, dim)?;
        let codes = mats.into_iter().map(|m| codec.encode(m)).collect();
        Ok(Self::from_codes(codec, codes))
    }

    pub fn codec(&self) -> Codec {
        self.codec
    }

    pub fn codes(&self) -> &[u128] {
        &self.codes
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn index_of(&self, m: &ModMatrix) -> Option<usize> {
        if m.modulus() != self.codec.modulus || m.rows() != self.codec.dim || !m.is_square() {
            return None;
        }
        self.codes.binary_search(&self.codec.encode(m)).ok()
    }

    pub fn contains(&self, m: &ModMatrix) -> bool {
        self.index_of(m).is_some()
    }

    pub fn get(&self, i: usize) -> ModMatrix {
        self.codec.decode(self.codes[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = ModMatrix> + '_ {
        self.codes.iter().map(move |&c| self.codec.decode(c))
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.codes
            .iter()
            .all(|c| other.codes.binary_search(c).is_ok())
    }

    /// `{x m x⁻¹ : m ∈ self}`.
    pub fn conjugate(&self, x: &ModMatrix, x_inv: &ModMatrix) -> Self {
        let codes = self
            .iter()
            .map(|m| self.codec.encode(&x.mul_unchecked(&m).mul_unchecked(x_inv)))
            .collect();
        Self::from_codes(self.codec, codes)
    }
}

/// Closure of `{I} ∪ gens` under right multiplication by `gens`; for a finite
/// group this is the generated subgroup.
pub fn closure(gens: &[ModMatrix], modulus: u32, dim: usize, cap: u128) -> Result<ElementSet> {
    let codec = Codec::new(modulus, dim)?;
    let start = ModMatrix::identity(modulus, dim);
    let mut seen: HashSet<u128> = HashSet::new();
    seen.insert(codec.encode(&start));
    let mut queue = VecDeque::from([start]);
    while let Some(x) = queue.pop_front() {
        for s in gens {
            let y = x.mul_unchecked(s);
            if seen.insert(codec.encode(&y)) {
                if seen.len() as u128 > cap {
                    return Err(Error::EnumerationTooLarge {
                        what: "subgroup closure".into(),
                        size: seen.len() as u128,
                        cap,
                    });
                }
                queue.push_back(y);
            }
        }
    }
    Ok(ElementSet::from_codes(codec, seen.into_iter().collect()))
}

/// Orbit of `start` under right and left multiplication: `⟨left⟩·start·⟨right⟩`.
pub fn double_coset(
    left: &[ModMatrix],
    start: &ModMatrix,
    right: &[ModMatrix],
    cap: u128,
) -> Result<ElementSet> {
    let codec = Codec::new(start.modulus(), start.rows())?;
    let mut seen: HashSet<u128> = HashSet::from([codec.encode(start)]);
    let mut queue = VecDeque::from([start.clone()]);
    while let Some(x) = queue.pop_front() {
        let next = left
            .iter()
            .map(|s| s.mul_unchecked(&x))
            .chain(right.iter().map(|s| x.mul_unchecked(s)));
        for y in next.collect::<Vec<_>>() {
            if seen.insert(codec.encode(&y)) {
                if seen.len() as u128 > cap {
                    return Err(Error::EnumerationTooLarge {
                        what: "double coset".into(),
                        size: seen.len() as u128,
                        cap,
                    });
                }
                queue.push_back(y);
            }
        }
    }
    Ok(ElementSet::from_codes(codec, seen.into_iter().collect()))
}

/// `J` together with the unipotent transvections `[[I, E], [0, I]]` and
/// `[[I, 0], [E, I]]`, `E` running over the elementary symmetric matrices.
pub fn sp_generators(g: usize, n: u32) -> Vec<ModMatrix> {
    let mut gens = vec![standard_j(g, n)];
    for i in 0..g {
        for j in i..g {
            let mut upper = ModMatrix::identity(n, 2 * g);
            upper.set(i, g + j, 1);
            upper.set(j, g + i, 1);
            let mut lower = ModMatrix::identity(n, 2 * g);
            lower.set(g + i, j, 1);
            lower.set(g + j, i, 1);
            gens.push(upper);
            gens.push(lower);
        }
    }
    gens
}

/// All of Sp(2g, ℤ/nℤ), produced by breadth-first closure.
#[derive(Debug, Clone)]
pub struct GroupEnumeration {
    g: usize,
    elements: ElementSet,
}

impl GroupEnumeration {
    pub fn genus(&self) -> usize {
        self.g
    }

    pub fn modulus(&self) -> u32 {
        self.elements.codec().modulus
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &ElementSet {
        &self.elements
    }

    pub fn element(&self, i: usize) -> SymplecticElement {
        SymplecticElement::from_sp_unchecked(self.elements.get(i))
    }

    pub fn index_of(&self, m: &ModMatrix) -> Option<usize> {
        self.elements.index_of(m)
    }

    pub fn iter(&self) -> impl Iterator<Item = ModMatrix> + '_ {
        self.elements.iter()
    }
}

/// Enumerates Sp(2g, ℤ/nℤ), refusing when the predicted order exceeds `cap`.
pub fn enumerate_sp(g: usize, n: u32, cap: u128) -> Result<GroupEnumeration> {
    if g == 0 || n < 2 {
        return Err(Error::InvalidParameter(format!("g={g}, n={n}")));
    }
    let size = group_order_mod(g, n);
    if size > cap {
        return Err(Error::EnumerationTooLarge {
            what: format!("Sp({}, Z/{n})", 2 * g),
            size,
            cap,
        });
    }
    let elements = closure(&sp_generators(g, n), n, 2 * g, cap)?;
    Ok(GroupEnumeration { g, elements })
}

/// Smallest subgroup of `within` containing `gens`.
pub fn subgroup_closure(
    gens: &[SymplecticElement],
    within: &GroupEnumeration,
) -> Result<ElementSet> {
    for s in gens {
        if within.index_of(s.matrix()).is_none() {
            return Err(Error::InvalidParameter(
                "generator outside the enumerated group".into(),
            ));
        }
    }
    let mats: Vec<ModMatrix> = gens.iter().map(|s| s.matrix().clone()).collect();
    closure(
        &mats,
        within.modulus(),
        2 * within.genus(),
        within.len() as u128,
    )
}

pub(crate) fn require_prime(p: u32) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{p} is not prime")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn random_word(g: usize, n: u32, word: &[usize]) -> ModMatrix {
        let gens = sp_generators(g, n);
        word.iter().fold(ModMatrix::identity(n, 2 * g), |acc, &i| {
            acc.mul_unchecked(&gens[i % gens.len()])
        })
    }

    #[test]
    fn orders_match_formula() {
        for (g, p, expected) in [(1, 2, 6), (1, 3, 24), (2, 2, 720), (2, 3, 51840)] {
            assert_eq!(group_order(g, p), expected);
            let e = enumerate_sp(g, p, DEFAULT_CAP).unwrap();
            assert_eq!(e.len() as u128, expected);
        }
        assert_eq!(group_order(3, 2), 1_451_520);
    }

    #[test]
    fn composite_orders() {
        // |SL_2(Z/4)| = 48, |SL_2(Z/6)| = 6 * 24
        assert_eq!(group_order_mod(1, 4), 48);
        assert_eq!(enumerate_sp(1, 4, DEFAULT_CAP).unwrap().len(), 48);
        assert_eq!(enumerate_sp(1, 6, DEFAULT_CAP).unwrap().len(), 144);
    }

    #[test]
    fn cap_is_enforced() {
        let err = enumerate_sp(2, 3, 1000).unwrap_err();
        assert!(matches!(
            err,
            Error::EnumerationTooLarge { size: 51840, .. }
        ));
    }

    #[test]
    fn multiplier_examples() {
        let id = ModMatrix::identity(7, 4);
        assert_eq!(multiplier_of(&id, 2).unwrap(), Some(1));
        assert_eq!(multiplier_of(&standard_j(2, 7), 2).unwrap(), Some(1));
        // diag(a1, a2, d1, d2) with a_i d_i = 3
        let d = ModMatrix::from_i64(7, 4, 4, &[2, 0, 0, 0, 0, 3, 0, 0, 0, 0, 5, 0, 0, 0, 0, 1])
            .unwrap();
        assert_eq!(multiplier_of(&d, 2).unwrap(), Some(3));
        let bad = ModMatrix::from_i64(7, 4, 4, &[2, 0, 0, 0, 0, 3, 0, 0, 0, 0, 5, 0, 0, 0, 0, 2])
            .unwrap();
        assert_eq!(multiplier_of(&bad, 2).unwrap(), None);
        assert!(multiplier_of(&ModMatrix::identity(7, 3), 2).is_err());
    }

    #[test]
    fn sp_is_the_multiplier_kernel() {
        for (g, p) in [(1, 3), (2, 2)] {
            let e = enumerate_sp(g, p, DEFAULT_CAP).unwrap();
            assert!(e.iter().all(|m| multiplier_of(&m, g).unwrap() == Some(1)));
        }
    }

    #[test]
    fn multiplier_is_multiplicative_on_gsp2_f3() {
        // GSp(2, F_3) = GL_2(F_3): Sp generators plus diag(1, 2)
        let mut gens = sp_generators(1, 3);
        gens.push(ModMatrix::from_i64(3, 2, 2, &[1, 0, 0, 2]).unwrap());
        let gsp = closure(&gens, 3, 2, 1000).unwrap();
        assert_eq!(gsp.len(), 48);
        let all: Vec<SymplecticElement> = gsp
            .iter()
            .map(|m| SymplecticElement::new(m).unwrap())
            .collect();
        for a in &all {
            for b in &all {
                let ab = a.mul(b).unwrap();
                assert_eq!(
                    multiplier_of(ab.matrix(), 1).unwrap(),
                    Some(ab.multiplier())
                );
            }
        }
    }

    #[test]
    fn closure_examples() {
        let e = enumerate_sp(1, 2, DEFAULT_CAP).unwrap();
        let id = SymplecticElement::identity(1, 2);
        assert_eq!(subgroup_closure(&[id], &e).unwrap().len(), 1);
        let gens: Vec<SymplecticElement> = sp_generators(1, 2)
            .into_iter()
            .map(|m| SymplecticElement::new(m).unwrap())
            .collect();
        assert_eq!(subgroup_closure(&gens, &e).unwrap().len(), 6);
    }

    #[test]
    fn codec_round_trip() {
        let codec = Codec::new(5, 4).unwrap();
        let m = random_word(2, 5, &[1, 4, 0, 3, 2, 0, 5]);
        assert_eq!(codec.decode(codec.encode(&m)), m);
        assert!(Codec::new(12, 6).is_err());
    }

    proptest! {
        #[test]
        fn multiplier_multiplicative_sampled(
            w1 in proptest::collection::vec(0usize..16, 0..12),
            w2 in proptest::collection::vec(0usize..16, 0..12),
            c1 in 1u32..5, c2 in 1u32..5,
        ) {
            let n = 5;
            let scale = |c: u32| {
                let mut d = ModMatrix::identity(n, 4);
                d.set(2, 2, c);
                d.set(3, 3, c);
                d
            };
            let a = random_word(2, n, &w1).mul_unchecked(&scale(c1));
            let b = scale(c2).mul_unchecked(&random_word(2, n, &w2));
            let la = multiplier_of(&a, 2).unwrap().unwrap();
            let lb = multiplier_of(&b, 2).unwrap().unwrap();
            prop_assert_eq!(la, c1);
            prop_assert_eq!(multiplier_of(&a.mul_unchecked(&b), 2).unwrap(), Some(la * lb % n));
        }

        #[test]
        fn inverse_is_inverse(w in proptest::collection::vec(0usize..16, 0..16), c in 1u32..7) {
            let mut d = ModMatrix::identity(7, 4);
            d.set(2, 2, c);
            d.set(3, 3, c);
            let m = SymplecticElement::new(random_word(2, 7, &w).mul_unchecked(&d)).unwrap();
            prop_assert!(m.mul(&m.inverse()).unwrap().matrix().is_identity());
        }
    }
}
