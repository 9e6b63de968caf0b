//! Error types shared across the crate.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A model parameter violates its invariant (e.g. a nonpositive Poisson
    /// mean at some season, a non-causal latent process).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An argument is outside the operation's domain (e.g. a quantile level
    /// outside [0,1], a link argument with |u| >= 1).
    #[error("domain error: {0}")]
    Domain(String),

    /// Observed data is incompatible with the model; `t` is the 1-based time
    /// index of the offending observation.
    #[error("data error at t={t}: {message}")]
    Data { t: usize, message: String },

    /// Every particle's importance weight reached zero; `t` is the furthest
    /// time any particle survived to.
    #[error("likelihood underflow: all particle weights vanished by t={t}")]
    LikelihoodUnderflow { t: usize },

    /// A series has (numerically) zero variance where a correlation or
    /// standardization is required.
    #[error("degenerate input: {0}")]
    Degenerate(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
