use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A state or operator lost more probability mass to the Fock cutoff
    /// than the configured limit allows.
    #[error("truncation error in {context}: tail mass {tail:.3e} exceeds {limit:.1e} (increase dim)")]
    Truncation {
        context: &'static str,
        tail: f64,
        limit: f64,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("no root: {0}")]
    NoRoot(String),

    #[error("sampling timeout: {accepted} of {proposals} proposals accepted (shell too narrow)")]
    SamplingTimeout { proposals: u64, accepted: u64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
