use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("value out of range: {0}")]
    Range(String),
    #[error("argument {0} coincides with a pole")]
    Pole(f64),
    #[error("singular: {0}")]
    Singular(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("oracle unavailable: {0}")]
    OracleUnavailable(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    /// Process exit code used by the command line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Input(_)
            | Error::Parse(_)
            | Error::Range(_)
            | Error::Pole(_)
            | Error::Dimension { .. }
            | Error::Unsupported(_) => 1,
            Error::Singular(_) | Error::OracleUnavailable(_) | Error::Internal(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
