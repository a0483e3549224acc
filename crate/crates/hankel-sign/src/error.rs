use thiserror::Error;

/// Everything that can go wrong inside the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),
    #[error("not available: {0}")]
    NotAvailable(String),
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("window truncation: {0}")]
    Truncation(String),
    #[error("ill-conditioned division, b-function grows: {0}")]
    Growing(String),
    #[error("insufficient eigenvalues: {0}")]
    Insufficient(String),
    #[error("eigensolver: {0}")]
    Eigen(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    Config(String),
}

impl Error {
    /// Short machine-readable tag, used in diagnostic JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::InvalidKernel(_) => "invalid_kernel",
            Error::NotAvailable(_) => "not_available",
            Error::Quadrature(_) => "quadrature",
            Error::Truncation(_) => "truncation",
            Error::Growing(_) => "growing",
            Error::Insufficient(_) => "insufficient",
            Error::Eigen(_) => "eigen",
            Error::Parse(_) => "parse",
            Error::Config(_) => "config",
        }
    }

    /// Whether the failure is the caller's fault (bad input) rather than numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::InvalidKernel(_) | Error::Parse(_) | Error::Config(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
