use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("capacity exceeded: {what} is {actual}, limit {limit}")]
    Capacity {
        what: &'static str,
        limit: usize,
        actual: usize,
    },

    #[error("data error: {0}")]
    Data(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("integration error: {0}")]
    Integration(String),

    #[error("degenerate amplitude: {0}")]
    DegenerateAmplitude(String),

    #[error("encoding error: {0}")]
    Encoding(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}

pub(crate) fn ensure_capacity(what: &'static str, actual: usize, limit: usize) -> Result<()> {
    if actual > limit {
        Err(Error::Capacity {
            what,
            limit,
            actual,
        })
    } else {
        Ok(())
    }
}
