use thiserror::Error;

/// Errors raised by the library. Probability-zero outcomes are never errors;
/// they are reported as a log-probability of negative infinity.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("size limit exceeded: {what} = {value} exceeds cap {cap}")]
    Size {
        what: &'static str,
        value: u64,
        cap: u64,
    },

    #[error("complexity budget exceeded: {work:.3e} units of work requested, budget {budget:.3e}")]
    Complexity { work: f64, budget: f64 },

    #[error("usage error: {0}")]
    Usage(String),

    #[error("invalid allelic partition: {0}")]
    InvalidPartition(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Usage(msg.into()))
}
