use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("operator is not partially orthonormal (max |AA^H - I| = {deviation:e})")]
    NotOrthonormal { deviation: f64 },

    #[error("degenerate ensemble draw: {0}")]
    DegenerateEnsemble(String),

    #[error("non-finite iterate at outer iteration {iteration}")]
    NumericalFailure { iteration: usize },

    #[error("transition estimation failed: {0}")]
    Estimation(String),

    #[error("malformed record at row {row}: {reason}")]
    Malformed { row: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
