//! Exact linear algebra over ℤ/nℤ, ℤ and ℚ.

mod dense;
mod modular;
mod scalar;
mod smith;

pub use dense::Matrix;
pub use modular::{
    factorize, inv_mod, is_prime, mat_inv_mod, mat_mul_mod, pow_mod, primitive_root, ModMatrix,
};
pub use scalar::{ExactDivRing, Field, Scalar};
pub use smith::{hermite_rows, smith_normal_form, SmithDecomposition};

use crate::{RatMatrix, Result};

/// Rank over ℚ by fraction-free elimination.
pub fn rank_exact(a: &RatMatrix) -> usize {
    a.rank_exact()
}

/// Basis of the right kernel of `a`, as columns.
pub fn nullspace_exact(a: &RatMatrix) -> RatMatrix {
    a.nullspace()
}

/// Basis of `colspan(a) ∩ colspan(b)`, as columns.
pub fn intersect_spans(a: &RatMatrix, b: &RatMatrix) -> Result<RatMatrix> {
    RatMatrix::intersect_spans(a, b)
}
