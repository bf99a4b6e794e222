//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("degenerate form: {0}")]
    Degenerate(String),

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("representation is not a Lie algebra homomorphism (residual {residual:.3e})")]
    NotHomomorphism { residual: f64 },

    #[error("unknown builtin '{name}', available: {available}")]
    UnknownBuiltin { name: String, available: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input spec at {path}: {message}")]
    Spec { path: String, message: String },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn spec(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Spec {
            path: path.into(),
            message: message.into(),
        }
    }
}
