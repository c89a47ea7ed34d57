use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An antichain met a chain (an interval below a top) in more than one point.
    #[error("antichain {antichain} meets the interval below top {top} in {count} points")]
    AntichainViolation {
        top: String,
        antichain: usize,
        count: usize,
    },

    /// The ladder rule found a non-empty interval that no antichain meets.
    #[error("ladder selection stalled below top {top} after {after}")]
    LadderStall { top: String, after: String },

    #[error("certification failed: {reason}")]
    Certification { reason: String, witness: Vec<usize> },

    #[error("not found: {0}")]
    NotFound(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
