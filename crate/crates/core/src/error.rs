use thiserror::Error;

/// Errors produced by the numeric building blocks.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("insufficient samples: need at least {need}, got {got}")]
    InsufficientSamples { need: usize, got: usize },

    #[error("layout mismatch: {0}")]
    LayoutMismatch(String),

    #[error("matrix is not positive semi-definite: diagonal entry {index} is {value:.3e}")]
    NotPositiveSemiDefinite { index: usize, value: f64 },

    #[error("non-finite value encountered in {0}")]
    NonFinite(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;

pub(crate) fn invalid(msg: impl Into<String>) -> CoreError {
    CoreError::InvalidArgument(msg.into())
}
