use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual} ({context})")]
    DimensionMismatch {
        expected: usize,
        actual: usize,
        context: &'static str,
    },

    #[error("invalid hex for a {len}-bit vector: {reason}")]
    InvalidHex { len: usize, reason: String },

    #[error("invalid seed: {0}")]
    InvalidSeed(String),

    #[error("sampler gave up after {attempts} attempts: {what}")]
    RetriesExhausted { attempts: usize, what: String },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("state too large for dense simulation: k = {0}")]
    StateTooLarge(usize),

    #[error("signing key has already been used")]
    KeySpent,

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("query budget of {0} exhausted")]
    BudgetExceeded(u64),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_len(expected: usize, actual: usize, context: &'static str) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected,
            actual,
            context,
        })
    }
}
