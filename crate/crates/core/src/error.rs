use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("ground-state convention violated: {0}")]
    ConventionViolation(String),
    #[error("internal consistency check failed: {0}")]
    InternalConsistency(String),
    #[error("state tracking failed: {0}")]
    TrackingFailure(String),
    #[error("resource limit: {0}")]
    ResourceLimit(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
