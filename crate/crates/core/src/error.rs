use thiserror::Error;

/// Errors produced by the core library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// One or more parameter preconditions failed. Each entry names the
    /// violated condition, e.g. `"k must be odd"`.
    #[error("bad parameters: {}", .0.join("; "))]
    BadParameters(Vec<String>),

    #[error("modulus is reducible over GF(3)")]
    ReducibleModulus,

    #[error("modulus degree mismatch: expected {expected}, got {got}")]
    DegreeMismatch { expected: u32, got: u32 },

    #[error("modulus must be monic")]
    NotMonic,

    #[error("zero has no multiplicative inverse")]
    ZeroInverse,

    #[error("argument must be nonzero")]
    ZeroArgument,

    #[error("n = {n} exceeds the limit {max} for this operation")]
    SizeLimit { n: u32, max: u32 },

    #[error("character-sum coefficient left the prime subfield")]
    NotInPrimeSubfield,

    #[error("trace form is singular")]
    SingularTraceForm,

    #[error("table length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("no rotation of the reference constant matches the spectrum at lambda index {lambda}")]
    NoMatchingRotation { lambda: u64 },

    #[error("representation has no terms")]
    EmptyRepresentation,

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
