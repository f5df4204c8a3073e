use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("coordinate overflow")]
    Overflow,
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("overlap mismatch in concatenation")]
    OverlapMismatch,
    #[error("symbol {0} outside the alphabet")]
    SymbolOutOfRange(i64),
    #[error("invalid node name: {0}")]
    InvalidNode(String),
    #[error("enumeration cap exceeded: {needed} > {cap}")]
    CapExceeded { needed: u128, cap: u128 },
    #[error("inconsistent knowledge state: {0}")]
    Inconsistent(String),
    #[error("reduction inversion failed: {0}")]
    Inversion(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("I/O: {0}")]
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
