use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("function undefined or non-finite: {0}")]
    DomainError(String),

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("matrix trace {trace} is too far from 1 to renormalize")]
    NotNormalized { trace: f64 },

    #[error("subalgebra spec inconsistent: {property} ({detail})")]
    SpecInconsistent { property: String, detail: String },

    #[error("representing density vanishes on the regularity interval: {0}")]
    NotRegular(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
