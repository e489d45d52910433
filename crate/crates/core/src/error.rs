use thiserror::Error;

/// Errors raised by the interpolation toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point {re}{im:+}i is not inside the open unit disc")]
    PoleOnDomain { re: f64, im: f64 },

    #[error("truncation error: {0}")]
    Truncation(String),

    #[error("unsupported space: {0}")]
    UnsupportedSpace(String),

    #[error("evaluation functional diverges at t = {0}")]
    Divergence(f64),

    #[error("space is not a Hilbert space (p = {0})")]
    NotHilbert(f64),

    #[error("ill-conditioned Gram matrix: smallest/largest eigenvalue = {0:e}")]
    IllConditioned(f64),

    #[error("degenerate nodes: {0}")]
    DegenerateNodes(String),

    #[error("mixed multiplicities are not supported: sigma must be all-distinct or a single repeated point")]
    MixedMultiplicity,

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Numerical failures (as opposed to rejected input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Truncation(_) | Error::IllConditioned(_) | Error::Divergence(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
