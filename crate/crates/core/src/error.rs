use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("infeasible solution: {0}")]
    InfeasibleSolution(String),
    #[error("invalid fractional solution: {0}")]
    InvalidFractional(String),
    #[error("lp solve failed: {0}")]
    Lp(String),
    #[error("size limit exceeded: {what} is {actual}, limit {limit}")]
    TooLarge {
        what: &'static str,
        actual: usize,
        limit: usize,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("rounding failed after {attempts} attempt(s): {reason}")]
    RoundingFailed { attempts: usize, reason: String },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
