use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("signal needs at least {min} samples, got {len}")]
    TooFewSamples { len: usize, min: usize },

    #[error("sample {index} is not finite")]
    NonFiniteSample { index: usize },

    #[error("invalid tone: {0}")]
    InvalidTone(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("candidate list is empty")]
    NoCandidates,

    #[error("frequency grid is empty")]
    EmptyGrid,

    #[error("frequency {new} duplicates already fitted frequency {existing} at the search resolution")]
    DuplicateFrequency { existing: f64, new: f64 },

    #[error("normal matrix is ill-conditioned (estimate {condition:.3e}) for frequencies {first} and {second}")]
    IllConditioned {
        first: f64,
        second: f64,
        condition: f64,
    },

    #[error("{requested} tones need at least {needed} samples, signal has {available}")]
    TooManyTones {
        requested: usize,
        needed: usize,
        available: usize,
    },

    #[error("known-order decomposition stopped after {found} of {requested} tones: {reason}")]
    Shortfall {
        found: usize,
        requested: usize,
        reason: String,
    },
}
