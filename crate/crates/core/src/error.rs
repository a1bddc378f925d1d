use thiserror::Error;

/// Error taxonomy shared by every module of the crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A time grid is malformed: step not positive, bounds inverted, or the
    /// points are not an integer lattice containing 0.
    #[error("grid alignment: {0}")]
    GridAlignment(String),

    /// A numerical argument is outside its mathematical domain (e.g. a Hurst
    /// exponent outside (0,1), coefficients (0,0)).
    #[error("domain: {0}")]
    Domain(String),

    /// An evaluation point falls outside the support a function or path was
    /// built on.
    #[error("support: {0}")]
    Support(String),

    /// Sample-path synthesis failed (e.g. no valid circulant embedding and the
    /// dense fallback is not positive definite).
    #[error("synthesis: {0}")]
    Synthesis(String),

    /// A finite-difference step or scale parameter is unusable at the
    /// requested point.
    #[error("step: {0}")]
    Step(String),

    /// An estimator has too little data to produce a value.
    #[error("estimation: {0}")]
    Estimation(String),

    /// A requested scale range cannot be resolved by the sampled data.
    #[error("scale: {0}")]
    Scale(String),

    /// An ensemble is too small for the requested statistic.
    #[error("statistics: {0}")]
    Statistics(String),

    /// The operation's hypotheses do not hold for the given inputs (e.g. a
    /// Hurst function without level-matching points near the target time).
    #[error("applicability: {0}")]
    Applicability(String),

    /// An argument combination is invalid for reasons not covered above.
    #[error("argument: {0}")]
    Argument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
