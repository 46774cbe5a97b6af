use thiserror::Error;

use crate::lattice::MultiIndex;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An index or argument left the domain it must live in (e.g. a shift below zero).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is singular (smallest pivot magnitude {pivot:e})")]
    Singular { pivot: f64 },

    #[error("matrix is defective (not diagonalizable); no root is constructed")]
    Defective,

    #[error("unsupported matrix size {n} (maximum {max})")]
    UnsupportedSize { n: usize, max: usize },

    #[error("degenerate equation: leading coefficient is zero")]
    Degenerate,

    #[error("boundary value unavailable on face {face} at {point}")]
    BoundaryUnavailable { face: usize, point: MultiIndex },

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("truncation order {requested} exceeds cap {cap}")]
    TruncationCap { requested: usize, cap: usize },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Failures that come from the numerics rather than from the inputs.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Singular { .. } | Error::Defective | Error::UnsupportedSize { .. } | Error::Degenerate
        )
    }
}
