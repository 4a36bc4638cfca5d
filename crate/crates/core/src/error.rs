use thiserror::Error;

/// Errors raised by the certification toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A tabulated loss was queried beyond its grid.
    #[error("range error: {0}")]
    Range(String),

    /// A documented precondition of the operation does not hold.
    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Exhaustive enumeration was requested for an instance that is too large.
    #[error("enumeration budget exceeded: n = {n} exceeds the limit of {limit}")]
    EnumerationBudget { n: usize, limit: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// An internal consistency check failed; indicates a bug.
    #[error("internal consistency error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn precondition<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Precondition(msg.into()))
}
