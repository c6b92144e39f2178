use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("expected {expected} bits, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("invalid bit value {0} (bits must be 0 or 1)")]
    InvalidBit(u8),
    #[error("convolution polynomial must start and end with 1")]
    InvalidPolynomial,
    #[error("invalid code: {0}")]
    InvalidCode(String),
    #[error("code has no frozen bits; the coset is the whole space")]
    NoFrozenBits,
    #[error("prefix of length {len} exceeds block length {n}")]
    PrefixTooLong { len: usize, n: usize },
    #[error("prefix sets frozen position {0} to one")]
    FrozenViolation(usize),
    #[error("enumeration of 2^{needed} elements exceeds the budget of 2^{budget}")]
    BudgetExceeded { needed: usize, budget: usize },
    #[error("list size must be positive")]
    ZeroListSize,
    #[error("invalid estimator parameters: {0}")]
    InvalidParameter(String),
    #[error("density evolution produced a non-finite value at design SNR {0} dB")]
    GaNonConvergence(f64),
    #[error("reliability sequence: {0}")]
    Sequence(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unsupported cache format: {0:?}")]
    CacheVersion(String),
    #[error("{0}")]
    Empty(&'static str),
    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
