//! Error type shared by all modules.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse classification used by callers (e.g. to map to exit codes).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    /// Bad or unsupported input; the computation was never started.
    Validation,
    /// The computation ran but could not produce a trustworthy result.
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("not supported: {0}")]
    NotSupported(String),

    #[error("invalid temperature: {0}")]
    InvalidTemperature(String),

    #[error("divergent integral: {0}")]
    DivergentIntegral(String),

    #[error("pole collision: {0}")]
    PoleCollision(String),

    #[error(
        "quadrature did not converge: achieved error estimate {achieved:.3e}, required {required:.3e}"
    )]
    QuadratureNoConvergence { achieved: f64, required: f64 },

    #[error("eigensolver exceeded the iteration cap of {0}")]
    EigenNoConvergence(usize),

    #[error("unresolved spectrum: {0}")]
    UnresolvedSpectrum(String),
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::InvalidInput(_)
            | Error::NotSupported(_)
            | Error::InvalidTemperature(_)
            | Error::DivergentIntegral(_) => ErrorCategory::Validation,
            Error::PoleCollision(_)
            | Error::QuadratureNoConvergence { .. }
            | Error::EigenNoConvergence(_)
            | Error::UnresolvedSpectrum(_) => ErrorCategory::Numerical,
        }
    }
}
