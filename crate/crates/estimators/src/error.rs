use thiserror::Error;

/// Errors produced by estimator drivers.
#[derive(Debug, Error)]
pub enum EstimatorError {
    /// A precondition on budgets, weights, or model compatibility failed.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// A model evaluation failed; `index` is the position of the parameter
    /// draw in the shared sample sequence, so the run can be replayed.
    #[error("model evaluation failed at sample {index}: {message}")]
    SampleFailure { index: usize, message: String },

    #[error(transparent)]
    Core(#[from] kinuq_core::CoreError),
}

pub type Result<T> = std::result::Result<T, EstimatorError>;

pub(crate) fn config(msg: impl Into<String>) -> EstimatorError {
    EstimatorError::InvalidConfig(msg.into())
}
