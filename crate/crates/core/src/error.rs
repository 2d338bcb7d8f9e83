//! Error type shared by all toolkit modules.

use thiserror::Error;

/// Errors raised by state construction, phase-space operations and protocol
/// analytics.
#[derive(Debug, Error)]
pub enum Error {
    /// Matrix/vector dimensions do not match the operation's requirements.
    #[error("dimension error: {0}")]
    Dimension(String),
    /// A mode index is out of range or a partition is inconsistent.
    #[error("addressing error: {0}")]
    Addressing(String),
    /// The state violates a physicality constraint (symplectic positivity,
    /// purity bounds, ...).
    #[error("unphysical state: {0}")]
    Unphysical(String),
    /// A documented precondition of the operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// A numeric routine failed (eigensolver, quadrature accuracy, ...).
    #[error("numeric failure: {0}")]
    Numeric(String),
    /// The requested case is deliberately out of scope.
    #[error("unsupported case: {0}")]
    Unsupported(String),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
