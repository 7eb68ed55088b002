//! Error types shared across the crate.

use thiserror::Error;

/// Errors reported by parameter validation, state checks, and arithmetic
/// domain violations.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violates a structural requirement (size, congruence,
    /// variant configuration, missing key, ...).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An operation was applied to an object in the wrong state
    /// (e.g. rescaling a level-1 ciphertext, decrypting a size-3 ciphertext).
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// Arithmetic domain error (non-invertible element, no root of the
    /// requested order).
    #[error("domain error: {0}")]
    Domain(String),

    /// Prime generation ran out of candidates in the requested range.
    #[error("prime search exhausted: {0}")]
    PrimeExhausted(String),

    /// Encoded values exceed the headroom of the modulus chain.
    #[error("plaintext overflow: {0}")]
    Overflow(String),
}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn state(msg: impl Into<String>) -> Self {
        Error::InvalidState(msg.into())
    }
}
