//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A physical or mathematical domain restriction was violated.
    #[error("domain error: {0}")]
    Domain(String),

    /// Invalid run/scenario configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// A documented precondition of an operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The friction model admits no level-wise bound; the box-maximum
    /// machinery must be used instead.
    #[error("friction model is not level-bounded (unbounded in |v|): {0}")]
    NotHCompliant(String),

    /// A certificate check was invoked for the wrong parameter regime.
    #[error("wrong certificate for this parameter regime: {0}")]
    WrongRegime(String),

    /// The integrator produced a non-physical state and aborted.
    #[error("numeric blow-up at t = {t}: {reason}")]
    Blowup { t: f64, reason: String },

    /// Decay-rate fitting failed.
    #[error("fit error: {0}")]
    Fit(String),

    /// A numerical kernel (eigen-solver, root bracket) failed.
    #[error("numeric error: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;
