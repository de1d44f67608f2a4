use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Too few observations for the requested statistic.
    #[error("insufficient data: need at least {needed} observations, got {got}")]
    InsufficientData { needed: usize, got: usize },

    /// One coordinate of the sample is entirely tied, so the tie-corrected
    /// denominator vanishes.
    #[error("degenerate margin: coordinate {0} is fully tied")]
    DegenerateMargin(char),

    /// Inclusion-exclusion produced a clearly negative cell.
    #[error("invalid bivariate cdf: cell ({x}, {y}) has mass {mass:e}")]
    InvalidCdf { x: usize, y: usize, mass: f64 },

    /// The grid leaves more probability outside the truncation than allowed.
    #[error("tail mass {tail_mass:e} exceeds the allowed {allowed:e}")]
    Precision { tail_mass: f64, allowed: f64 },

    /// The brute-force oracle refuses grids above its size guard.
    #[error("grid order {order} exceeds the brute-force limit {limit}")]
    CostGuard { order: usize, limit: usize },

    /// A conditioning event has (numerically) zero probability.
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;
