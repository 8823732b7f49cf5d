use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error(
        "quadrature did not reach tolerance {tol:e} on [{lo}, {hi}] (estimate {estimate}, error {error:e})"
    )]
    QuadratureFailure {
        lo: f64,
        hi: f64,
        estimate: f64,
        error: f64,
        tol: f64,
    },

    #[error("ODE integration failed at y = {at}: {reason}")]
    Integration { at: f64, reason: String },

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("covariance factorization failed: {0}")]
    Factorization(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
