//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors produced by constructors, algebraic operations, and numerical routines.
#[derive(Debug, Error)]
pub enum CwqError {
    /// A dimension or index constraint was violated (wrong `k`, mismatched basis, bad range).
    #[error("dimension error: {0}")]
    Dimension(String),

    /// Coordinates passed where a state was required fail the membership test.
    #[error("not a state: {0}")]
    NotAState(String),

    /// A request would exceed the dense tensor-space cap or another size guard.
    #[error("size error: {0}")]
    Size(String),

    /// Exact integer arithmetic would overflow; use the ratio form instead.
    #[error("overflow, use the ratio form: {0}")]
    Overflow(String),

    /// A scan failed to locate the feature it was asked for (peak, half-maximum crossing).
    #[error("scan error: {0}")]
    Scan(String),

    /// A polynomial expression could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    /// An iterative numerical routine failed to converge or produced an invalid result.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, CwqError>;
