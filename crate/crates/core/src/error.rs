use thiserror::Error;

/// Error type shared by every module of the crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument fell outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A constructed object violates one of its structural invariants.
    #[error("validation error: {0}")]
    Validation(String),

    /// Adaptive quadrature failed to reach the requested tolerance.
    #[error("quadrature failure in {context}: requested {requested:e}, achieved {achieved:e}")]
    Quadrature {
        context: &'static str,
        requested: f64,
        achieved: f64,
    },

    /// Picard iteration left the contraction regime.
    #[error("Picard divergence at this amplitude: iterate {iterate} reached sup-norm {sup:e}")]
    PicardDivergence { iterate: usize, sup: f64 },

    /// A quantity was requested beyond the stored solution horizon.
    #[error("horizon error: {0}")]
    Horizon(String),

    /// The operation is not defined for the given family or configuration.
    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn unsupported(msg: impl Into<String>) -> Self {
        Error::Unsupported(msg.into())
    }

    pub fn horizon(msg: impl Into<String>) -> Self {
        Error::Horizon(msg.into())
    }
}
