//! Error types shared across the library.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration (bad dimensions, thresholds out of range, ...).
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Argument outside an operation's mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A quadrature grid too coarse to resolve the integrand.
    #[error("quadrature resolution: {0}")]
    Resolution(String),

    /// A channel matrix too close to rank-deficient for zero-forcing.
    /// Names the most collinear column pair to aid scheduler diagnostics.
    #[error(
        "channel matrix numerically singular (condition {cond:.3e}); most collinear columns: {col_a}, {col_b}"
    )]
    Singular { col_a: usize, col_b: usize, cond: f64 },

    /// Numerical failure outside expected tolerances (e.g. negative radicand).
    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
