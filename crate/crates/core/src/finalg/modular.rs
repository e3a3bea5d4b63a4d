use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;

use super::dense::Matrix;
use crate::error::{Error, Result};

/// Matrix over ℤ/nℤ with entries kept reduced in `[0, n)`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModMatrix {
    modulus: u32,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl fmt::Debug for ModMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ModMatrix(mod {}) [", self.modulus)?;
        for r in 0..self.rows {
            if r > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{:?}", self.row(r))?;
        }
        write!(f, "]")
    }
}

impl ModMatrix {
    pub fn zeros(modulus: u32, rows: usize, cols: usize) -> Self {
        assert!(modulus >= 1 && rows >= 1 && cols >= 1);
        Self {
            modulus,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(modulus: u32, n: usize) -> Self {
        let mut m = Self::zeros(modulus, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    /// Builds from signed integers, reducing each entry.
    pub fn from_i64(modulus: u32, rows: usize, cols: usize, entries: &[i64]) -> Result<Self> {
        if entries.len() != rows * cols || rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        if modulus == 0 {
            return Err(Error::InvalidParameter("modulus must be positive".into()));
        }
        let n = modulus as i64;
        Ok(Self {
            modulus,
            rows,
            cols,
            data: entries.iter().map(|&x| x.rem_euclid(n) as u32).collect(),
        })
    }

    /// Builds from unsigned residues, reducing each entry.
    pub fn from_residues(modulus: u32, rows: usize, cols: usize, data: Vec<u32>) -> Result<Self> {
        if data.len() != rows * cols || rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if modulus == 0 {
            return Err(Error::InvalidParameter("modulus must be positive".into()));
        }
        Ok(Self {
            modulus,
            rows,
            cols,
            data: data.into_iter().map(|x| x % modulus).collect(),
        })
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[u32] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[u32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.data[r * self.cols + c]
    }

    /// Sets an entry, reducing it modulo n.
    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u32) {
        self.data[r * self.cols + c] = v % self.modulus;
    }

    pub fn set_signed(&mut self, r: usize, c: usize, v: i64) {
        self.data[r * self.cols + c] = v.rem_euclid(self.modulus as i64) as u32;
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| self.get(i, j) == if i == j { 1 % self.modulus } else { 0 })
            })
    }

    fn check_mul(&self, rhs: &Self) -> Result<()> {
        if self.modulus != rhs.modulus {
            return Err(Error::ModulusMismatch {
                left: self.modulus,
                right: rhs.modulus,
            });
        }
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        Ok(())
    }

    /// Product without shape checks; callers guarantee conformity.
    pub fn mul_unchecked(&self, rhs: &Self) -> Self {
        debug_assert!(self.check_mul(rhs).is_ok());
        let n = self.modulus as u64;
        let mut data = vec![0u32; self.rows * rhs.cols];
        for i in 0..self.rows {
            for j in 0..rhs.cols {
                let mut acc = 0u64;
                for k in 0..self.cols {
                    acc += self.data[i * self.cols + k] as u64 * rhs.data[k * rhs.cols + j] as u64;
                }
                data[i * rhs.cols + j] = (acc % n) as u32;
            }
        }
        Self {
            modulus: self.modulus,
            rows: self.rows,
            cols: rhs.cols,
            data,
        }
    }

    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        self.check_mul(rhs)?;
        Ok(self.mul_unchecked(rhs))
    }

    pub fn mul_vec(&self, v: &[u32]) -> Vec<u32> {
        assert_eq!(v.len(), self.cols);
        let n = self.modulus as u64;
        (0..self.rows)
            .map(|i| {
                let acc: u64 = self
                    .row(i)
                    .iter()
                    .zip(v)
                    .map(|(&a, &b)| a as u64 * b as u64)
                    .sum();
                (acc % n) as u32
            })
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.modulus, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.get(r, c);
            }
        }
        t
    }

    pub fn scale(&self, s: u32) -> Self {
        let n = self.modulus as u64;
        let mut out = self.clone();
        for x in &mut out.data {
            *x = ((*x as u64 * s as u64) % n) as u32;
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.scale(self.modulus - 1)
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        if self.modulus != rhs.modulus {
            return Err(Error::ModulusMismatch {
                left: self.modulus,
                right: rhs.modulus,
            });
        }
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::DimensionMismatch("add".into()));
        }
        let mut out = self.clone();
        for (x, y) in out.data.iter_mut().zip(&rhs.data) {
            *x = ((*x as u64 + *y as u64) % self.modulus as u64) as u32;
        }
        Ok(out)
    }

    /// Reduces every entry modulo a divisor `m` of the current modulus.
    pub fn reduce(&self, m: u32) -> Result<Self> {
        if m == 0 || !self.modulus.is_multiple_of(m) {
            return Err(Error::InvalidParameter(format!(
                "{m} does not divide {}",
                self.modulus
            )));
        }
        Ok(Self {
            modulus: m,
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| x % m).collect(),
        })
    }

    /// Representatives in `[0, n)` as an integer matrix.
    pub fn to_int_matrix(&self) -> Matrix<BigInt> {
        Matrix::from_vec(
            self.rows,
            self.cols,
            self.data.iter().map(|&x| BigInt::from(x)).collect(),
        )
        .expect("shape")
    }

    /// Reduces an integer matrix modulo `modulus`.
    pub fn from_int_matrix(m: &Matrix<BigInt>, modulus: u32) -> Result<Self> {
        let n = BigInt::from(modulus);
        let entries: Vec<i64> = m
            .as_slice()
            .iter()
            .map(|x| x.mod_floor(&n).to_i64().expect("reduced entry fits"))
            .collect();
        Self::from_i64(modulus, m.rows(), m.cols(), &entries)
    }

    /// Rank over F_p; the modulus must be prime.
    pub fn rank_mod_prime(&self) -> usize {
        let p = self.modulus;
        let mut m = self.clone();
        let mut rank = 0;
        for col in 0..m.cols {
            if rank == m.rows {
                break;
            }
            let Some(piv) = (rank..m.rows).find(|&r| m.get(r, col) != 0) else {
                continue;
            };
            m.swap_rows(rank, piv);
            let inv = inv_mod(m.get(rank, col), p).expect("prime modulus");
            for r in rank + 1..m.rows {
                let f = (m.get(r, col) as u64 * inv as u64 % p as u64) as u32;
                if f == 0 {
                    continue;
                }
                for c in col..m.cols {
                    let v =
                        (m.get(r, c) as u64 + (p - f) as u64 * m.get(rank, c) as u64) % p as u64;
                    m.data[r * m.cols + c] = v as u32;
                }
            }
            rank += 1;
        }
        rank
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    /// Inverse over F_p by Gauss-Jordan.
    fn inverse_mod_prime(&self) -> Option<Self> {
        let p = self.modulus;
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(p, n);
        for col in 0..n {
            let piv = (col..n).find(|&r| a.get(r, col) != 0)?;
            a.swap_rows(col, piv);
            inv.swap_rows(col, piv);
            let s = inv_mod(a.get(col, col), p)?;
            for c in 0..n {
                a.data[col * n + c] = (a.get(col, c) as u64 * s as u64 % p as u64) as u32;
                inv.data[col * n + c] = (inv.get(col, c) as u64 * s as u64 % p as u64) as u32;
            }
            for r in 0..n {
                let f = a.get(r, col);
                if r == col || f == 0 {
                    continue;
                }
                let nf = (p - f) as u64;
                for c in 0..n {
                    a.data[r * n + c] =
                        ((a.get(r, c) as u64 + nf * a.get(col, c) as u64) % p as u64) as u32;
                    inv.data[r * n + c] =
                        ((inv.get(r, c) as u64 + nf * inv.get(col, c) as u64) % p as u64) as u32;
                }
            }
        }
        Some(inv)
    }

    /// Inverse modulo a prime power `p^e`: invert mod p, then Newton/Hensel lift.
    fn inverse_mod_prime_power(&self, p: u32, e: u32) -> Option<Self> {
        let q = p.pow(e);
        let base = self.reduce(p).ok()?.inverse_mod_prime()?;
        let a = self.reduce(q).ok()?;
        let mut x = Self { modulus: q, ..base };
        let two = Self::identity(q, self.rows).scale(2);
        let mut precision = 1;
        while precision < e {
            // X <- X (2I - A X) doubles the p-adic precision
            let ax = a.mul_unchecked(&x);
            let corr = two.add(&ax.neg()).expect("shape");
            x = x.mul_unchecked(&corr);
            precision *= 2;
        }
        Some(x)
    }

    /// Inverse modulo n; fails with [`Error::NotInvertible`] on a non-unit determinant.
    pub fn inverse(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch(
                "inverse of non-square matrix".into(),
            ));
        }
        let n = self.modulus;
        if n == 1 {
            return Ok(self.clone());
        }
        let factors = factorize(n);
        if factors.len() == 1 && factors[0].1 == 1 {
            return self.inverse_mod_prime().ok_or(Error::NotInvertible(n));
        }
        let mut parts = Vec::with_capacity(factors.len());
        for &(p, e) in &factors {
            let inv = self
                .inverse_mod_prime_power(p, e)
                .ok_or(Error::NotInvertible(n))?;
            parts.push(inv);
        }
        Ok(crt_combine(&parts, n))
    }
}

/// Chinese remaindering of matrices over coprime moduli whose product is `n`.
fn crt_combine(parts: &[ModMatrix], n: u32) -> ModMatrix {
    let first = &parts[0];
    let mut out = ModMatrix::zeros(n, first.rows, first.cols);
    for idx in 0..first.data.len() {
        let mut acc: u64 = 0;
        for part in parts {
            let q = part.modulus;
            let m = n / q;
            let minv = inv_mod(m % q, q).expect("coprime moduli") as u64;
            acc += part.data[idx] as u64 % q as u64 * minv % q as u64 * m as u64;
            acc %= n as u64;
        }
        out.data[idx] = acc as u32;
    }
    out
}

pub fn mat_mul_mod(a: &ModMatrix, b: &ModMatrix) -> Result<ModMatrix> {
    a.mul(b)
}

pub fn mat_inv_mod(a: &ModMatrix) -> Result<ModMatrix> {
    a.inverse()
}

/// Inverse of `a` modulo `n`, if it exists.
pub fn inv_mod(a: u32, n: u32) -> Option<u32> {
    let e = (a as i64).extended_gcd(&(n as i64));
    if e.gcd != 1 {
        return None;
    }
    Some(e.x.rem_euclid(n as i64) as u32)
}

/// Prime factorisation as `(p, e)` pairs in increasing order.
pub fn factorize(mut n: u32) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn is_prime(n: u32) -> bool {
    n >= 2 && factorize(n) == vec![(n, 1)]
}

/// Smallest generator of (ℤ/pℤ)^×.
pub fn primitive_root(p: u32) -> u32 {
    if p == 2 {
        return 1;
    }
    let order = p - 1;
    let primes: Vec<u32> = factorize(order).into_iter().map(|(q, _)| q).collect();
    (2..p)
        .find(|&g| primes.iter().all(|&q| pow_mod(g, order / q, p) != 1))
        .expect("prime modulus has a primitive root")
}

pub fn pow_mod(base: u32, mut exp: u32, n: u32) -> u32 {
    let n64 = n as u64;
    let mut b = base as u64 % n64;
    let mut acc = 1 % n64;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % n64;
        }
        b = b * b % n64;
        exp >>= 1;
    }
    acc as u32
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::IntMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn j_matrix(g: usize, n: u32) -> ModMatrix {
        let mut j = ModMatrix::zeros(n, 2 * g, 2 * g);
        for i in 0..g {
            j.set(i, g + i, 1);
            j.set_signed(g + i, i, -1);
        }
        j
    }

    #[test]
    fn identity_squared() {
        let i = ModMatrix::identity(5, 2);
        assert_eq!(mat_mul_mod(&i, &i).unwrap(), i);
    }

    #[test]
    fn j_squared_is_minus_identity() {
        for g in 1..=3 {
            for n in [2, 3, 4, 5, 6, 9] {
                let j = j_matrix(g, n);
                let jj = j.mul(&j).unwrap();
                assert_eq!(jj, ModMatrix::identity(n, 2 * g).neg());
                assert_eq!(j.inverse().unwrap(), j.neg());
            }
        }
    }

    #[test]
    fn product_matches_integer_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let a: Vec<i64> = (0..16).map(|_| rng.gen_range(-50..50)).collect();
            let b: Vec<i64> = (0..16).map(|_| rng.gen_range(-50..50)).collect();
            let ia = IntMatrix::from_i64(4, 4, &a);
            let ib = IntMatrix::from_i64(4, 4, &b);
            let oracle = ModMatrix::from_int_matrix(&ia.mul(&ib).unwrap(), 3).unwrap();
            let ma = ModMatrix::from_i64(3, 4, 4, &a).unwrap();
            let mb = ModMatrix::from_i64(3, 4, 4, &b).unwrap();
            assert_eq!(ma.mul(&mb).unwrap(), oracle);
        }
    }

    #[test]
    fn random_inverse_mod_nine() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut found = 0;
        while found < 25 {
            let a: Vec<i64> = (0..16).map(|_| rng.gen_range(0..9)).collect();
            let m = ModMatrix::from_i64(9, 4, 4, &a).unwrap();
            let det = m.to_int_matrix().determinant().unwrap();
            let unit = det % 3 != num_bigint::BigInt::from(0);
            match m.inverse() {
                Ok(inv) => {
                    assert!(unit);
                    assert!(m.mul(&inv).unwrap().is_identity());
                    assert!(inv.mul(&m).unwrap().is_identity());
                    found += 1;
                }
                Err(e) => {
                    assert!(!unit);
                    assert_eq!(e, Error::NotInvertible(9));
                }
            }
        }
    }

    #[test]
    fn composite_modulus_inverse() {
        let m = ModMatrix::from_i64(12, 2, 2, &[1, 2, 3, 5]).unwrap();
        let inv = m.inverse().unwrap();
        assert!(m.mul(&inv).unwrap().is_identity());
        let singular = ModMatrix::from_i64(12, 2, 2, &[2, 0, 0, 1]).unwrap();
        assert!(singular.inverse().is_err());
    }

    #[test]
    fn mismatches_are_errors() {
        let a = ModMatrix::identity(5, 2);
        let b = ModMatrix::identity(7, 2);
        assert!(matches!(a.mul(&b), Err(Error::ModulusMismatch { .. })));
        let c = ModMatrix::zeros(5, 3, 1);
        assert!(matches!(a.mul(&c), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn primitive_roots() {
        assert_eq!(primitive_root(2), 1);
        assert_eq!(primitive_root(3), 2);
        assert_eq!(primitive_root(5), 2);
        assert_eq!(primitive_root(7), 3);
    }
}
