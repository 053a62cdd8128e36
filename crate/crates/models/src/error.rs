use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("time step {dt} exceeds the stability limit {limit}")]
    CflViolation { dt: f64, limit: f64 },
    #[error("degenerate state: {0}")]
    DegenerateState(String),
    #[error("solver failure: {0}")]
    SolverFailure(String),
    #[error(transparent)]
    Core(#[from] kinuq_core::CoreError),
}

pub type Result<T> = std::result::Result<T, ModelError>;

pub(crate) fn config(msg: impl Into<String>) -> ModelError {
    ModelError::InvalidConfig(msg.into())
}
