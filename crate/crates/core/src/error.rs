use thiserror::Error;

/// Errors raised by the restoration library.
#[derive(Debug, Error)]
pub enum Error {
    /// A grid or kernel has dimensions that make the requested operation
    /// meaningless (zero-sized, kernel larger than image, mismatched shapes).
    #[error("invalid dimensions: {0}")]
    InvalidDimension(String),

    /// A parameter is outside its mathematical domain (e.g. sigma <= 0).
    #[error("domain error: {0}")]
    Domain(String),

    /// A numeric self-consistency check failed. This signals a bug upstream
    /// (a non-Hermitian spectrum, a denominator that should be positive)
    /// rather than bad user input.
    #[error("numeric consistency: {0}")]
    NumericConsistency(String),

    /// An iterate or input contains NaN or infinity.
    #[error("non-finite value: {0}")]
    NonFinite(String),
}

pub type Result<T> = std::result::Result<T, Error>;
