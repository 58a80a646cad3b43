use thiserror::Error;

/// Errors produced by the point-set, metric and experiment routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("usage: {0}")]
    Usage(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("numeric failure: {0}")]
    NumericFailure(String),

    #[error("construction invalid: {0}")]
    ConstructionInvalid(String),

    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("norming functional undefined for the zero function")]
    ZeroFunction,

    #[error("schedule failure at step {step}: deficit {deficit:.3e}")]
    ScheduleFailure { step: usize, deficit: f64 },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
