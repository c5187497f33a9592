use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parameter {name} = {value} lies in the excluded band around the unit circle")]
    ExcludedBand { name: &'static str, value: f64 },

    #[error("non-stationary parameters: {0}")]
    NonStationary(String),

    #[error("pmf tail mass {tail_mass:e} still above tolerance {tolerance:e} at the k_max cap {cap}")]
    TailCapExceeded { tail_mass: f64, tolerance: f64, cap: usize },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid block length {b} for series of length {n}")]
    BlockLength { b: usize, n: usize },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("optimizer did not converge: {0}")]
    NotConverged(String),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
