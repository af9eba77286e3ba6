use alloc::string::String;

/// Everything that can go wrong in the library.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("primes must be listed in strictly increasing order")]
    PrimesNotIncreasing,
    #[error("exponent of {prime} must be at least 1")]
    ZeroExponent { prime: u64 },
    #[error("modulus {0} exceeds the supported limit")]
    ModulusTooLarge(u64),
    #[error("modulus must be at least 2")]
    TrivialModulus,
    #[error("{d} does not divide {m}")]
    NotADivisor { d: u64, m: u64 },
    #[error("coordinate {index} out of range: {value} >= {bound}")]
    CoordinateOutOfRange { index: usize, value: u64, bound: u64 },
    #[error("expected {expected} coordinates, got {got}")]
    CoordinateCount { expected: usize, got: usize },
    #[error("element {element} out of range for Z_{m}")]
    ElementOutOfRange { element: u64, m: u64 },
    #[error("multisets live in Z_{left} and Z_{right}")]
    ModulusMismatch { left: u64, right: u64 },
    #[error("direction {direction} out of range ({rank} primes)")]
    DirectionOutOfRange { direction: usize, rank: usize },
    #[error("exponent {exponent} out of range for prime {prime}")]
    ExponentOutOfRange { prime: u64, exponent: u32 },
    #[error("expected a set, found weight {weight} at {element}")]
    NotASet { element: usize, weight: i64 },
    #[error("negative weight {weight} at {element}")]
    NegativeWeight { element: usize, weight: i64 },
    #[error("the zero multiset has no spectrum")]
    ZeroMultiset,
    #[error("|A|*|B| = {product} but m = {m}")]
    CardinalityMismatch { product: u64, m: u64 },
    #[error("not a tiling")]
    NotATiling,
    #[error("arithmetic overflow")]
    Overflow,
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("not applicable: {0}")]
    Inapplicable(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("enumeration too large: {0}")]
    TooLarge(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn precondition(msg: impl Into<String>) -> Error {
    Error::Precondition(msg.into())
}

pub(crate) fn inapplicable(msg: impl Into<String>) -> Error {
    Error::Inapplicable(msg.into())
}
