use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("NotPIntegral: {value} is not {p}-integral")]
    NotPIntegral { value: String, p: u64 },
    #[error("NotAUnit: {value} is not a {p}-adic unit")]
    NotAUnit { value: String, p: u64 },
    #[error("coefficient rings differ: {0} vs {1}")]
    RingMismatch(String, String),
    #[error("variable tables differ")]
    TableMismatch,
    #[error("NonNilpotentSubstitution: image of {0} has a nonzero constant term")]
    NonNilpotentSubstitution(String),
    #[error("NotReversible: linear coefficient {0} is not invertible")]
    NotReversible(String),
    #[error("series must start with the linear term x: {0}")]
    NotNormalized(String),
    #[error("TruncationTooSmall: degree bound {bound} < {needed}")]
    TruncationTooSmall { bound: u32, needed: u64 },
    #[error("ArakiInconsistent: v_{index} = {value} is not {p}-integral")]
    ArakiInconsistent { index: u32, value: String, p: u64 },
    #[error("UnexpectedRank: rational kernel for m = {m} has dimension {dim}")]
    UnexpectedRank { m: u32, dim: usize },
    #[error("UseAdamsTrick: coefficient {0} is not an integer")]
    UseAdamsTrick(String),
    #[error("LiftAddViolated: c_{i} at step r = {r} is not proportional to phi_{i} mod p")]
    LiftAddViolated { i: u32, r: u32 },
    #[error("NonzeroCheckFailed: alpha_1 for c_{i} is divisible by p")]
    NonzeroCheckFailed { i: u32 },
    #[error("IntegralityFailure: {0}")]
    IntegralityFailure(String),
    #[error("degree mismatch: expected {expected}, found {found}")]
    DegreeMismatch { expected: u32, found: u32 },
    #[error("lemma check failed: {0}")]
    LemmaViolation(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
