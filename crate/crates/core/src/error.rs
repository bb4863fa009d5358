use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failures raised by the constructions. Verification outcomes are never
/// errors; they are reported as verdicts.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("prime {0} is neither 3 nor congruent to 7 mod 8 (it is {rem} mod 8)", rem = .0 % 8)]
    WrongResidueClass(u64),
    #[error("{value} is out of range 1..={max}")]
    OutOfRange { value: i64, max: i64 },
    #[error("{k} is not a quadratic non-residue mod {p}")]
    NotNonResidue { k: u64, p: u64 },
    #[error("prime {q} must be congruent to {expected} mod 4 for this construction")]
    BadResidueClass { q: u64, expected: u64 },
    #[error("no Hadamard construction available for order {0}")]
    UnsupportedOrder(usize),
    #[error("matrix is not Hadamard: {0}")]
    NotHadamard(String),
    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("rank {r} must satisfy 1 <= r < d = {d}")]
    RankOutOfRange { d: u64, r: u64 },
    #[error("index {index} out of range 0..={max}")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("Hadamard order {found} does not match required order {expected}")]
    HadamardOrderMismatch { expected: usize, found: usize },
    #[error("basis vectors {i} and {j} are not orthogonal (inner product {inner:e})")]
    NotOrthogonal { i: usize, j: usize, inner: f64 },
    #[error("no unit phase exists for d = {d}, r = {r} (Re z = {re_z} < -1)")]
    Infeasible { d: u64, r: u64, re_z: String },
    #[error("unitary family is not certified to span the symmetric subspace")]
    NotCertified,
    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    /// Variant name, for messages that name the failed precondition.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NotPrime(_) => "NotPrime",
            Error::WrongResidueClass(_) => "WrongResidueClass",
            Error::OutOfRange { .. } => "OutOfRange",
            Error::NotNonResidue { .. } => "NotNonResidue",
            Error::BadResidueClass { .. } => "BadResidueClass",
            Error::UnsupportedOrder(_) => "UnsupportedOrder",
            Error::NotHadamard(_) => "NotHadamard",
            Error::ShapeMismatch { .. } => "ShapeMismatch",
            Error::NotSquare { .. } => "NotSquare",
            Error::RankOutOfRange { .. } => "RankOutOfRange",
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::HadamardOrderMismatch { .. } => "HadamardOrderMismatch",
            Error::NotOrthogonal { .. } => "NotOrthogonal",
            Error::Infeasible { .. } => "Infeasible",
            Error::NotCertified => "NotCertified",
            Error::Invalid(_) => "Invalid",
        }
    }
}
