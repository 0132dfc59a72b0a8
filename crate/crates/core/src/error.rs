use thiserror::Error;

/// Errors produced by the core model operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("index {index} outside declared window [{lo}, {hi}]")]
    WindowViolation { index: i64, lo: i64, hi: i64 },

    #[error("empty index range: {lo} > {hi}")]
    EmptyRange { lo: i64, hi: i64 },

    #[error("invalid environment: {0}")]
    InvalidEnvironment(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("rectangle too large: {sites} sites exceeds cap {cap}")]
    SizeError { sites: u64, cap: u64 },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("boundary parameter error: {0}")]
    Parameter(String),

    #[error("hypothesis violation: {0}")]
    HypothesisViolation(String),

    #[error("malformed path: {0}")]
    Path(String),

    #[error("mode error: {0}")]
    Mode(String),

    #[error("unresolvable minimization: {0}")]
    Unresolvable(String),
}

pub type Result<T> = std::result::Result<T, Error>;
