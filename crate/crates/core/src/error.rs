use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eig:e}, tolerance {tol:e})")]
    NotPsd { min_eig: f64, tol: f64 },

    #[error("Gram matrices disagree (residual {residual:e}, tolerance {tol:e})")]
    GramMismatch { residual: f64, tol: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),

    #[error("enumeration budget exceeded: {candidates} candidates (limit {limit})")]
    TooLarge { candidates: f64, limit: u64 },

    #[error("serialization: {0}")]
    Serialization(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
