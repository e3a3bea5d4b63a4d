use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Zero};

/// Ring element usable as a dense matrix entry.
pub trait Scalar:
    Clone
    + PartialEq
    + Debug
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
}

impl<T> Scalar for T where
    T: Clone
        + PartialEq
        + Debug
        + Zero
        + One
        + Add<Output = T>
        + Sub<Output = T>
        + Mul<Output = T>
        + Neg<Output = T>
{
}

/// A scalar with exact (or at least total) division by nonzero elements.
///
/// Integer types are deliberately left out: their `Div` truncates.
pub trait Field: Scalar + Div<Output = Self> {}

impl Field for BigRational {}
impl Field for Ratio<i64> {}
impl Field for Ratio<i128> {}
impl Field for f64 {}
impl Field for f32 {}
impl Field for Complex<f64> {}
impl Field for Complex<f32> {}

/// Integral domain with exact division, as needed by fraction-free elimination.
pub trait ExactDivRing: Scalar {
    /// Divide `self` by `rhs`, assuming the quotient is exact.
    fn exact_div(&self, rhs: &Self) -> Self;
}

impl ExactDivRing for BigInt {
    fn exact_div(&self, rhs: &Self) -> Self {
        self / rhs
    }
}

impl ExactDivRing for i64 {
    fn exact_div(&self, rhs: &Self) -> Self {
        self / rhs
    }
}

impl ExactDivRing for i128 {
    fn exact_div(&self, rhs: &Self) -> Self {
        self / rhs
    }
}
