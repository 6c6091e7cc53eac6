use thiserror::Error;

use crate::funcdsl::{ParseError, PiecewiseError};
use crate::quadrature::QuadratureError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("rejected input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Quadrature(#[from] QuadratureError),

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error(transparent)]
    Piecewise(#[from] PiecewiseError),

    #[error("non-finite value {value} at x = {x}")]
    NonFinite { x: f64, value: f64 },

    #[error("truncation certificate unavailable: {0}")]
    Truncation(String),

    /// The modular overflowed at working precision: `lambda` lies outside the
    /// admissible cone for this function.
    #[error("modular overflow at lambda = {lambda}")]
    Overflow { lambda: f64 },

    #[error("bracketing failed: {0}")]
    Bracketing(String),

    #[error("audit failed: {0}")]
    Audit(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Process exit code for the CLI: 2 validation, 3 audit/inequality, 4 numeric.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_)
            | Error::Parse(_)
            | Error::Piecewise(_)
            | Error::Config { .. }
            | Error::Json(_)
            | Error::Io(_) => 2,
            Error::Audit(_) => 3,
            Error::Quadrature(_)
            | Error::NonFinite { .. }
            | Error::Truncation(_)
            | Error::Overflow { .. }
            | Error::Bracketing(_) => 4,
        }
    }
}
