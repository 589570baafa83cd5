use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("polynomial is not invertible modulo x^p - 1")]
    NotInvertible,
    #[error("matrix is singular (no invertible pivot)")]
    Singular,
    #[error("code design failed: {0}")]
    DesignFailure(String),
    #[error("key generation failed: {0}")]
    KeygenFailure(String),
    #[error("decoding failed after {iterations} iterations")]
    DecodingFailure { iterations: usize },
    #[error("format error: {0}")]
    Format(String),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    /// Short machine-readable category name.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Parameter(_) => "ParameterError",
            Error::NotInvertible => "NotInvertible",
            Error::Singular => "Singular",
            Error::DesignFailure(_) => "DesignFailure",
            Error::KeygenFailure(_) => "KeygenFailure",
            Error::DecodingFailure { .. } => "DecodingFailure",
            Error::Format(_) => "FormatError",
        }
    }
}
