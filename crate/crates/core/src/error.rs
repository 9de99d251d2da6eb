use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("rejected input: {0}")]
    Rejected(String),
    #[error("capacity exceeded: {arity} inputs is above the brute-force limit of {limit}")]
    Capacity { arity: usize, limit: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("empty set: {0}")]
    EmptySet(String),
    #[error("invalid query log: {0}")]
    InvalidLog(String),
    /// An invariant that only a broken oracle model or a bug can violate.
    #[error("internal defect: {0}")]
    Defect(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn rejected(msg: impl Into<String>) -> Error {
    Error::Rejected(msg.into())
}
