use std::path::PathBuf;

use thiserror::Error;

/// Errors raised while parsing a rate-profile file.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProfileError {
    #[error("malformed profile file: {0}")]
    Malformed(String),
    #[error("duplicate index {0} in rate profile")]
    DuplicateIndex(usize),
    #[error("rate profile index {index} outside 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("rate profile must select at least one index")]
    Empty,
}

impl ProfileError {
    /// Stable numeric code, distinct per failure kind.
    pub fn code(&self) -> u8 {
        match self {
            ProfileError::Malformed(_) => 10,
            ProfileError::DuplicateIndex(_) => 11,
            ProfileError::IndexOutOfRange { .. } => 12,
            ProfileError::Empty => 13,
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("index {index} outside 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("shift {shift} outside 0..{modulus}")]
    ShiftOutOfRange { shift: usize, modulus: usize },
    #[error("duplicate shift {0}")]
    DuplicateShift(usize),
    #[error("invalid polar dimension n={0} (need 1 <= n <= {max})", max = crate::polar::MAX_LOG_LEN)]
    InvalidDimension(u32),
    #[error("K={k} outside 1..={len}")]
    InvalidK { k: usize, len: usize },
    #[error("invalid connection polynomial: {0}")]
    InvalidPolynomial(String),
    #[error("polynomial memory {memory} too large for block length {len}")]
    PolynomialTooLong { memory: usize, len: usize },
    #[error("rate profile is for N={profile}, code uses N={code}")]
    DimensionMismatch { profile: usize, code: usize },
    #[error(
        "K={k} exceeds enumeration guard {guard}; raise the guard to enumerate 2^{k} codewords"
    )]
    EnumerationGuard { k: usize, guard: usize },
    #[error("exhaustive mode supports N <= {max}, got N={len}")]
    ExhaustiveTooLarge { len: usize, max: usize },
    #[error("invalid bit string: {0}")]
    InvalidBitString(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
