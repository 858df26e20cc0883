use thiserror::Error;

/// Errors produced by the numeric core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("need at least {min} experts, got {got}")]
    TooFewExperts { min: usize, got: usize },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("negative weight {value} at index {index}")]
    Negative { index: usize, value: f64 },

    #[error("weights sum to {sum}, not 1")]
    NotOnSimplex { sum: f64 },

    #[error("weight at index {index} is not strictly positive")]
    NotInterior { index: usize },

    #[error("degenerate: all weights are zero")]
    Degenerate,

    #[error("infeasible: sum(beta)>1 (sum = {sum})")]
    Infeasible { sum: f64 },

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("index {k} out of range for {len} elements")]
    OutOfRange { k: usize, len: usize },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("io: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::InvalidParameter {
            name,
            value,
            reason,
        }
    }

    /// True for failures that come from arithmetic breaking down mid-run
    /// rather than from bad inputs.
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::Numeric(_))
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
