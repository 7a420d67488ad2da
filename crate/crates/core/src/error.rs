use thiserror::Error;

/// Errors raised by phase-space constructions.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid system descriptor: {0}")]
    InvalidSystem(String),

    #[error("dimension overflow while computing {0}")]
    DimensionOverflow(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("index {index} out of range (limit {limit})")]
    OutOfRange { index: usize, limit: usize },

    #[error("point does not match the system: {0}")]
    PointMismatch(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("grid resolution {resolution} too small; need at least {required}")]
    ResolutionTooSmall { resolution: usize, required: usize },

    #[error("grid too large: {0}")]
    GridTooLarge(String),

    #[error("incompatible phase functions: {0}")]
    Incompatible(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("time stepping unstable: trace drifted by {drift:e} at t = {time}")]
    Unstable { drift: f64, time: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
