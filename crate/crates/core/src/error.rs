use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the detection library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("strangeness bag is empty")]
    EmptyBag,

    #[error("invalid p-value {0}: must lie in (0, 1]")]
    InvalidPValue(f64),

    #[error("theta {0} outside the open interval (0, 1)")]
    InvalidTheta(f64),

    #[error("feature dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("label {0} is not in the declared label set")]
    UnknownLabel(i32),

    #[error(
        "p-value distribution does not indicate a change; delay undefined (mean log factor {0})"
    )]
    UndefinedDelay(f64),

    #[error("sample value {0} outside [0, 1]")]
    SampleOutOfRange(f64),

    #[error("not enough samples: need at least {needed}, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("unknown pool `{0}`")]
    UnknownPool(String),

    #[error("pool `{pool}` exhausted: requested {requested}, only {available} left (short by {})", requested - available)]
    PoolExhausted {
        pool: String,
        requested: usize,
        available: usize,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
