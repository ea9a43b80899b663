use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("guard limit exceeded: {what} = {value} > {limit}")]
    GuardLimit {
        what: &'static str,
        value: usize,
        limit: usize,
    },
    #[error("argument out of range: {0}")]
    OutOfRange(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is not symmetric: {0}")]
    NotSymmetric(String),
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("spectral condition violated: {0}")]
    Spectral(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn is_cap(&self) -> bool {
        matches!(self, Error::GuardLimit { .. })
    }
}
