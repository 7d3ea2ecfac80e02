use num_bigint::BigUint;

use crate::arith::PartialFactorization;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("field of size {p}^{degree} exceeds the configured memory budget")]
    FieldTooLarge { p: u64, degree: u32 },
    #[error("invalid field context: {0}")]
    InvalidContext(String),
    #[error("target is not in the subgroup generated by the base")]
    NotInSubgroup,
    #[error("group order factorization is inconsistent (g^N != 1)")]
    InconsistentOrder,
    #[error("group order is too large for baby-step giant-step ({0} bits)")]
    OrderTooLarge(u64),
    #[error("division by the zero polynomial")]
    DivisionByZeroPoly,
    #[error("k = {k} exceeds q + delta = {q} + {delta}: h1*X^q - h0 cannot have a degree-k factor")]
    DegreeConstraint { k: usize, q: u64, delta: usize },
    #[error("no sparse representation found after {tried} candidates")]
    NoRepresentationFound { tried: u64 },
    #[error("group order factorization did not finish within budget ({} unfactored cofactors)", partial.unfactored.len())]
    FactorizationTimeout { partial: PartialFactorization },
    #[error("modulus {0} divides q^2 - 1; constant logarithms are not determined by projection")]
    DegenerateModulus(BigUint),
    #[error("modulus {0} is not a prime factor of the group order")]
    BadModulus(BigUint),
    #[error("coset enumeration produced {found} blocks, expected {expected}")]
    InternalCountMismatch { expected: u64, found: u64 },
    #[error("relation matrix reached rank {rank} of {needed} with {rows} rows after {cosets_tried} cosets")]
    RankDeficient {
        rank: usize,
        needed: usize,
        rows: usize,
        cosets_tried: usize,
    },
    #[error("base linear system has rank {rank} for {unknowns} unknowns ({rows} rows)")]
    BaseSystemRankDeficient {
        rank: usize,
        unknowns: usize,
        rows: usize,
    },
    #[error("trap relation for {trap} involves another trap {other}")]
    TrapLoop { trap: String, other: String },
    #[error("q - v_P = {0} is not invertible modulo the subgroup order")]
    NonInvertibleCoefficient(u64),
    #[error("target vector is not in the row span")]
    NotInRowSpan,
    #[error("descent revisited {0} while it was still being descended")]
    CycleDetected(String),
    #[error("no logarithm available for {0}")]
    MissingLog(String),
    #[error("verification failed: {0}")]
    VerificationFailed(String),
    #[error("discrete log modulo {prime}^{exponent} failed: {source}")]
    PohligHellman {
        prime: BigUint,
        exponent: u32,
        #[source]
        source: Box<Error>,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
