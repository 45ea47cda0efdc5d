use thiserror::Error;

/// A search or enumeration declined because its input is above a configured bound.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("guard refused {what}: needs {needed}, limit {limit}")]
pub struct GuardError {
    pub what: String,
    pub needed: u128,
    pub limit: u128,
}

impl GuardError {
    pub fn new(what: impl Into<String>, needed: u128, limit: u128) -> Self {
        GuardError { what: what.into(), needed, limit }
    }

    pub fn check(what: &str, needed: u128, limit: u128) -> Result<(), GuardError> {
        if needed > limit {
            Err(GuardError::new(what, needed, limit))
        } else {
            Ok(())
        }
    }
}

/// Coarse failure category, used by the command line to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureKind {
    /// Malformed or ill-shaped input.
    Input,
    Guard,
    Decode,
    /// Input parsed fine but violates a mathematical hypothesis.
    Precondition,
}

pub trait Failure {
    fn kind(&self) -> FailureKind;
}
