use thiserror::Error;

/// Errors raised by the quadratic-state machinery.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("phase-space dimension must be even and positive, got {0}")]
    OddDimension(usize),

    #[error("invariant violated: {0}")]
    InvariantViolated(String),

    #[error("basis mismatch: expected {expected:?}, got {got:?}")]
    BasisMismatch {
        expected: crate::Basis,
        got: crate::Basis,
    },

    #[error("angular operator norm {0} exceeds 1")]
    NotContraction(f64),

    #[error("operator is singular")]
    Singular,

    #[error("problem size N = {n} exceeds the enumeration limit {max}")]
    TooLarge { n: usize, max: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
