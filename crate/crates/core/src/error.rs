use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("modulus mismatch: {left} vs {right}")]
    ModulusMismatch { left: u32, right: u32 },
    #[error("matrix is not invertible modulo {0}")]
    NotInvertible(u32),
    #[error("genus mismatch: {left} vs {right}")]
    GenusMismatch { left: usize, right: usize },
    #[error("enumeration of {what} would produce {size} elements, over the cap of {cap}")]
    EnumerationTooLarge { what: String, size: u128, cap: u128 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("incompatible structure kinds: {0}")]
    IncompatibleKinds(String),
    #[error("lattice leaves the precision window: {0}")]
    WindowOverflow(String),
    #[error("ill-conditioned evaluation: {0}")]
    Conditioning(String),
}

pub type Result<T> = std::result::Result<T, Error>;
