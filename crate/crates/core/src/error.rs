use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("base field order {0} is not a supported prime")]
    InvalidBaseField(u32),
    #[error("extension degree {0} is not supported (need 1 <= n and q^n to fit in 64 bits)")]
    InvalidDegree(usize),
    #[error("modulus is not a monic irreducible polynomial of degree {degree}")]
    ReducibleModulus { degree: usize },
    #[error("element {0} is outside the field")]
    ElementOutOfRange(u64),
    #[error("basis has q-ary rank {rank}, expected {expected}")]
    RankDeficient { rank: usize, expected: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("linear system has no solution")]
    NoSolution,
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("decoding failure: no codeword within rank distance {capability}")]
    DecodingFailure { capability: usize },
    #[error("subspace of dimension {m} is below the minimum distance {d}: the subcode is {{0}}")]
    TrivialSubcode { m: usize, d: usize },
    #[error("component {position} does not lie in the subspace")]
    NotInSubspace { position: usize },
    #[error("component decoders failed for parts {failed:?}")]
    ComponentFailures { failed: Vec<usize> },
    #[error("subspaces overlap in a space of dimension {overlap}")]
    SubspacesOverlap { overlap: usize },
    #[error("exhaustive search over {size} words exceeds the limit of {limit}")]
    Oversized { size: u128, limit: u128 },
    #[error("subfield degree {s} does not divide extension degree {n}")]
    NotADivisor { s: usize, n: usize },
    #[error("factorization is not unique: {kernel_dim}-dimensional solution space")]
    NotUnique { kernel_dim: usize },
    #[error("subfield degree {s} must exceed d - 2 = {bound}")]
    SubfieldTooSmall { s: usize, bound: usize },
}
