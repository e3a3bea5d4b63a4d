//! Finite group theory and lattice models around Atkin–Lehner theory for GSp(2g).
//!
//! The crate works at desk scale (genus g ≤ 3, small primes): symplectic groups
//! over ℤ/nℤ, the type C Weyl group, Bruhat cells and parabolic subgroups,
//! combinatorial level structures, permutation-module correspondences and
//! Atkin–Lehner involutions on p-adic lattice chains.

pub mod analytic;
pub mod bruhat;
pub mod error;
pub mod finalg;
pub mod lattice;
pub mod levelstruct;
pub mod oldforms;
pub mod sympgrp;
pub mod weyl;

pub use error::{Error, Result};

use num_bigint::BigInt;
use num_rational::BigRational;

/// Integer matrix with arbitrary-precision entries.
pub type IntMatrix = finalg::Matrix<BigInt>;
/// Rational matrix with arbitrary-precision entries.
pub type RatMatrix = finalg::Matrix<BigRational>;
/// Point of the Siegel upper half space in double precision.
pub type SiegelPoint64 = analytic::SiegelPoint<f64>;
/// Rational permutation-module operator.
pub type RatOperator = oldforms::ModuleOperator<BigRational>;
