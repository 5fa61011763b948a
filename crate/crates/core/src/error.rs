use thiserror::Error;

/// Errors raised by model construction and evaluation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A configuration value violates one of its invariants.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// A formula was evaluated outside of its domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Two evaluations of the same quantity that must agree did not.
    #[error("consistency check failed: {0}")]
    Consistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

/// Returns an error unless `cond` holds.
pub(crate) fn ensure(cond: bool, name: &'static str, reason: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(invalid(name, reason))
    }
}
