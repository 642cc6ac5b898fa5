use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("division by zero")]
    DivisionByZero,
    #[error("{0} is not a fundamental discriminant")]
    NotFundamental(i64),
    #[error("elements belong to different fields")]
    FieldMismatch,
    #[error("cannot parse {input:?}: {reason}")]
    Parse { input: String, reason: String },
    #[error("prime {0} is outside the supported range (p < 65536)")]
    PrimeOutOfRange(u64),
    #[error("inverse of zero in residue field")]
    ZeroInverse,
    #[error("oracle candidate set has {count} points, above the cap of {cap}")]
    CandidateCap { count: u64, cap: u64 },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("type space overflows the 128-bit key")]
    KeyOverflow,
    #[error("oracle bound out of range: {0}")]
    BoundOverflow(String),
    #[error("checkpoint line {line}: {reason}")]
    Checkpoint { line: usize, reason: String },
    #[error("i/o: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn parse_err(input: &str, reason: impl Into<String>) -> Error {
    Error::Parse {
        input: input.to_string(),
        reason: reason.into(),
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
