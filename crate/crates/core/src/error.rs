//! Error type shared by all chaoslink modules.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("coefficients are not shift-decomposable: {0}")]
    NotShiftDecomposable(String),

    #[error("register value {value} outside [0, {max})")]
    RegisterOutOfRange { value: i64, max: u32 },

    #[error("sequence too short: {got} bits, need at least {need}")]
    SequenceTooShort { got: usize, need: usize },

    #[error("bit length {0} is not a multiple of 8")]
    RaggedBitLength(usize),

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("empty input")]
    EmptyInput,

    #[error("input has zero variance")]
    ZeroVariance,

    #[error("lag {lag} out of range 1..={max}")]
    LagOutOfRange { lag: usize, max: usize },

    #[error("size {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("not enough samples: {got} < {need}")]
    NotEnoughSamples { got: usize, need: usize },

    #[error("byte generator exhausted after {0} bytes")]
    GeneratorExhausted(usize),

    #[error("trajectory produced a non-finite value")]
    Divergent,

    #[error("no reference threshold for this configuration: {0}")]
    NoThreshold(String),
}

pub type Result<T> = std::result::Result<T, Error>;
