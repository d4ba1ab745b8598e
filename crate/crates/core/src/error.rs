use thiserror::Error;

/// Errors produced by the library. Each variant maps onto one failure
/// category that callers (the CLI in particular) can act on.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Strength/bias constraint `S + |B| <= 1` violated.
    #[error("observable constraint violated: {0}")]
    Constraint(String),

    #[error("unphysical state: {0}")]
    Unphysical(String),

    /// A precondition of a particular criterion does not hold for the inputs.
    #[error("criterion not applicable: {0}")]
    Domain(String),

    /// Two routes to the same quantity disagreed.
    #[error("internal consistency check failed: {0}")]
    InternalConsistency(String),

    #[error("construction failed: {0}")]
    ConstructionFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
