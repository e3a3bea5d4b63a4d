use std::fmt;
use std::ops::{Index, IndexMut};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::scalar::{ExactDivRing, Field, Scalar};
use crate::error::{Error, Result};

/// Dense row-major matrix over any [`Scalar`].
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", &self.data[r * self.cols..(r + 1) * self.cols])?;
        }
        write!(f, "]")
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (r, c): (usize, usize)) -> &T {
        &self.data[r * self.cols + c]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        &mut self.data[r * self.cols + c]
    }
}

impl<T> Matrix<T> {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    /// Builds a matrix from rows; panics on ragged input.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(nrows: usize, columns: &[Vec<T>]) -> Self {
        let mut m = Self::zeros(nrows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), nrows, "column length");
            for (i, v) in col.iter().enumerate() {
                m[(i, j)] = v.clone();
            }
        }
        m
    }

    pub fn column(&self, c: usize) -> Vec<T> {
        (0..self.rows).map(|r| self[(r, c)].clone()).collect()
    }

    pub fn columns(&self) -> Vec<Vec<T>> {
        (0..self.cols).map(|c| self.column(c)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t[(c, r)] = self[(r, c)].clone();
            }
        }
        t
    }

    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let prod = a.clone() * rhs[(k, j)].clone();
                    let cur = std::mem::replace(&mut out[(i, j)], T::zero());
                    out[(i, j)] = cur + prod;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[T]) -> Result<Vec<T>> {
        if self.cols != v.len() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect())
    }

    fn zip_with(&self, rhs: &Self, f: impl Fn(T, T) -> T) -> Result<Self> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| f(a.clone(), b.clone()))
                .collect(),
        })
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, |a, b| a + b)
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, |a, b| a - b)
    }

    pub fn scale(&self, s: &T) -> Self {
        self.map(|a| a.clone() * s.clone())
    }

    /// Horizontal concatenation `[self | rhs]`.
    pub fn hstack(&self, rhs: &Self) -> Result<Self> {
        if self.rows != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "hstack of {} and {} rows",
                self.rows, rhs.rows
            )));
        }
        let mut out = Self::zeros(self.rows, self.cols + rhs.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[(r, c)] = self[(r, c)].clone();
            }
            for c in 0..rhs.cols {
                out[(r, self.cols + c)] = rhs[(r, c)].clone();
            }
        }
        Ok(out)
    }

    /// Vertical concatenation, `self` on top.
    pub fn vstack(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.cols {
            return Err(Error::DimensionMismatch(format!(
                "vstack of {} and {} columns",
                self.cols, rhs.cols
            )));
        }
        let mut data = self.data.clone();
        data.extend(rhs.data.iter().cloned());
        Self::from_vec(self.rows + rhs.rows, self.cols, data)
    }

    pub fn is_zero_matrix(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }
}

impl<T: Field> Matrix<T> {
    /// Reduced row echelon form and the pivot columns.
    pub fn rref(&self) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(p) = (row..m.rows).find(|&r| !m[(r, col)].is_zero()) else {
                continue;
            };
            m.swap_rows(row, p);
            let inv = T::one() / m[(row, col)].clone();
            for c in col..m.cols {
                let v = m[(row, c)].clone() * inv.clone();
                m[(row, c)] = v;
            }
            for r in 0..m.rows {
                if r == row || m[(r, col)].is_zero() {
                    continue;
                }
                let factor = m[(r, col)].clone();
                for c in col..m.cols {
                    let v = m[(r, c)].clone() - factor.clone() * m[(row, c)].clone();
                    m[(r, c)] = v;
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right kernel, returned as the columns of a `cols x k` matrix.
    pub fn nullspace(&self) -> Self {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut basis = Self::zeros(self.cols, free.len());
        for (k, &f) in free.iter().enumerate() {
            basis[(f, k)] = T::one();
            for (i, &p) in pivots.iter().enumerate() {
                basis[(p, k)] = -r[(i, f)].clone();
            }
        }
        basis
    }

    /// Columns forming a basis of the column span, taken from `self` itself.
    pub fn column_basis(&self) -> Self {
        let (_, pivots) = self.rref();
        let cols: Vec<Vec<T>> = pivots.iter().map(|&c| self.column(c)).collect();
        Self::from_columns(self.rows, &cols)
    }

    /// Basis of `colspan(a) ∩ colspan(b)`.
    pub fn intersect_spans(a: &Self, b: &Self) -> Result<Self> {
        let stacked = a.hstack(&b.scale(&-T::one()))?;
        let kernel = stacked.nullspace();
        let mut vecs = Vec::with_capacity(kernel.cols());
        for k in 0..kernel.cols() {
            let x: Vec<T> = (0..a.cols()).map(|i| kernel[(i, k)].clone()).collect();
            vecs.push(a.mul_vec(&x)?);
        }
        Ok(Self::from_columns(a.rows(), &vecs).column_basis())
    }

    /// Whether every column of `other` lies in the column span of `self`.
    pub fn colspan_contains(&self, other: &Self) -> Result<bool> {
        let joint = self.hstack(other)?;
        Ok(joint.rank() == self.rank())
    }

    /// Inverse by Gauss-Jordan; `None` when singular.
    pub fn inverse(&self) -> Option<Self> {
        if self.rows != self.cols {
            return None;
        }
        let aug = self.hstack(&Self::identity(self.rows)).ok()?;
        let (r, pivots) = aug.rref();
        if pivots.len() < self.rows || pivots[self.rows - 1] >= self.rows {
            return None;
        }
        let mut inv = Self::zeros(self.rows, self.rows);
        for i in 0..self.rows {
            for j in 0..self.rows {
                inv[(i, j)] = r[(i, self.rows + j)].clone();
            }
        }
        Some(inv)
    }
}

impl<T> Matrix<T> {
    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }
}

impl<T: ExactDivRing> Matrix<T> {
    /// Rank by Bareiss fraction-free elimination; every intermediate stays in the ring.
    pub fn bareiss_rank(&self) -> usize {
        let mut m = self.clone();
        let mut prev = T::one();
        let mut rank = 0;
        for col in 0..m.cols {
            if rank == m.rows {
                break;
            }
            let Some(p) = (rank..m.rows).find(|&r| !m[(r, col)].is_zero()) else {
                continue;
            };
            m.swap_rows(rank, p);
            let pivot = m[(rank, col)].clone();
            for r in rank + 1..m.rows {
                let lead = m[(r, col)].clone();
                for c in col + 1..m.cols {
                    let v = pivot.clone() * m[(r, c)].clone() - lead.clone() * m[(rank, c)].clone();
                    m[(r, c)] = v.exact_div(&prev);
                }
                m[(r, col)] = T::zero();
            }
            prev = pivot;
            rank += 1;
        }
        rank
    }
}

impl Matrix<BigRational> {
    /// Scales each row by the lcm of its denominators, giving an integer matrix
    /// with the same row space.
    pub fn clear_denominators(&self) -> Matrix<BigInt> {
        let mut out = Matrix::<BigInt>::zeros(self.rows, self.cols);
        for r in 0..self.rows {
            let lcm = self
                .row(r)
                .iter()
                .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
            for c in 0..self.cols {
                let q = &self[(r, c)];
                out[(r, c)] = q.numer() * (&lcm / q.denom());
            }
        }
        out
    }

    /// Exact rank via fraction-free elimination on the denominator-cleared matrix.
    pub fn rank_exact(&self) -> usize {
        self.clear_denominators().bareiss_rank()
    }

    pub fn from_integer_matrix(m: &Matrix<BigInt>) -> Self {
        m.map(|x| BigRational::from_integer(x.clone()))
    }
}

impl Matrix<BigInt> {
    pub fn from_i64(rows: usize, cols: usize, data: &[i64]) -> Self {
        Matrix::from_vec(rows, cols, data.iter().map(|&x| BigInt::from(x)).collect())
            .expect("shape")
    }

    /// Determinant by Bareiss elimination.
    pub fn determinant(&self) -> Result<BigInt> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch("determinant of non-square".into()));
        }
        let n = self.rows;
        let mut m = self.clone();
        let mut prev = BigInt::one();
        let mut sign = BigInt::one();
        for k in 0..n {
            let Some(p) = (k..n).find(|&r| !m[(r, k)].is_zero()) else {
                return Ok(BigInt::zero());
            };
            if p != k {
                m.swap_rows(k, p);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &m[(k, k)] * &m[(i, j)] - &m[(i, k)] * &m[(k, j)];
                    m[(i, j)] = v / &prev;
                }
                m[(i, k)] = BigInt::zero();
            }
            prev = m[(k, k)].clone();
        }
        Ok(sign * m[(n - 1, n - 1)].clone())
    }

    pub fn max_abs_entry(&self) -> BigInt {
        self.data
            .iter()
            .map(|x| x.abs())
            .max()
            .unwrap_or_else(BigInt::zero)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{IntMatrix, RatMatrix};

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn rat(rows: usize, cols: usize, v: &[i64]) -> RatMatrix {
        Matrix::from_vec(rows, cols, v.iter().map(|&x| q(x)).collect()).unwrap()
    }

    #[test]
    fn rank_of_identity() {
        for k in 1..6 {
            assert_eq!(RatMatrix::identity(k).rank_exact(), k);
            assert_eq!(RatMatrix::identity(k).rank(), k);
        }
    }

    #[test]
    fn intersection_of_coordinate_axes_is_trivial() {
        let e1 = rat(2, 1, &[1, 0]);
        let e2 = rat(2, 1, &[0, 1]);
        let i = RatMatrix::intersect_spans(&e1, &e2).unwrap();
        assert_eq!(i.cols(), 0);
    }

    #[test]
    fn intersection_of_planes_in_three_space() {
        // span{e1, e2} ∩ span{e2, e3} = span{e2}
        let a = rat(3, 2, &[1, 0, 0, 1, 0, 0]);
        let b = rat(3, 2, &[0, 0, 1, 0, 0, 1]);
        let i = RatMatrix::intersect_spans(&a, &b).unwrap();
        assert_eq!(i.cols(), 1);
        assert!(i[(0, 0)].is_zero() && i[(2, 0)].is_zero() && !i[(1, 0)].is_zero());
    }

    #[test]
    fn nullspace_vectors_are_killed() {
        let a = rat(2, 4, &[1, 2, 3, 4, 2, 4, 6, 9]);
        let n = a.nullspace();
        assert_eq!(n.cols() + a.rank_exact(), 4);
        assert!(a.mul(&n).unwrap().is_zero_matrix());
    }

    #[test]
    fn bareiss_matches_rref_on_dependent_rows() {
        let a = rat(3, 3, &[1, 2, 3, 2, 4, 6, 1, 0, 1]);
        assert_eq!(a.rank_exact(), 2);
        assert_eq!(a.rank(), 2);
    }

    #[test]
    fn determinant_small() {
        // cofactor expansion along the first row: 2*(6-2) + 1*(1-3) = 6
        let m = IntMatrix::from_i64(3, 3, &[2, 0, 1, 1, 3, 2, 1, 1, 2]);
        assert_eq!(m.determinant().unwrap(), BigInt::from(6));
        let swapped = IntMatrix::from_i64(3, 3, &[1, 3, 2, 2, 0, 1, 1, 1, 2]);
        assert_eq!(swapped.determinant().unwrap(), BigInt::from(-6));
        let singular = IntMatrix::from_i64(3, 3, &[2, 0, 1, 1, 3, 2, 1, 1, 1]);
        assert!(singular.determinant().unwrap().is_zero());
    }

    #[test]
    fn rational_inverse() {
        let a = rat(2, 2, &[2, 1, 1, 1]);
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv).unwrap(), RatMatrix::identity(2));
        assert!(rat(2, 2, &[1, 2, 2, 4]).inverse().is_none());
    }
}
