use thiserror::Error;

/// Errors raised by register operations, key handling, and protocol runs.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum Error {
    #[error("degenerate amplitude pair")]
    DegenerateAmplitude,

    #[error("dead or unknown qubit handle {0}")]
    DeadHandle(u64),

    #[error("operation requires distinct qubits")]
    DuplicateHandle,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("key exhausted: need {needed} bits at offset {offset}, key has {available}")]
    KeyExhausted {
        needed: usize,
        offset: usize,
        available: usize,
    },

    #[error("invalid hex key string: {0}")]
    InvalidHexKey(String),

    #[error("insufficient copies for swap test: need {needed}, have {available}")]
    InsufficientCopies { needed: usize, available: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dispute record is missing the random key r")]
    MissingDisputeKey,

    #[error("party {0} does not hold key {1}")]
    MissingKey(String, String),

    #[error("unknown scenario: {0}")]
    UnknownScenario(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
