use thiserror::Error;

/// Errors produced by state construction, simulation and the closed-form analytics.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid dimensions: {0}")]
    InvalidDimensions(String),

    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("normalization violated: sum of squared row norms is {sum}, expected {expected}")]
    Normalization { sum: f64, expected: f64 },

    #[error("state has zero total norm")]
    ZeroNorm,

    #[error("invalid good set: {0}")]
    InvalidGoodSet(String),

    #[error("impossible moment target: {0}")]
    ImpossibleTarget(String),

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("probability oscillation is degenerate, no optimal time exists")]
    NoOptimum,

    #[error("optimal time n_{j} = {time} is not an integer")]
    NonIntegerTime { j: u32, time: f64 },

    #[error("{requested} amplitudes exceed the memory limit of {limit}")]
    MemoryLimit { requested: usize, limit: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
