use thiserror::Error;

/// Errors raised anywhere in the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    /// A size limit was exceeded (qubit cap, dense-matrix guard, output filter).
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    /// Input data violated a numeric or structural invariant.
    #[error("validation failed: {0}")]
    Validation(String),
    /// A qubit, rank, or chunk index lies outside its allowed range.
    #[error("out of range: {0}")]
    Range(String),
    /// An operation was called outside its precondition (e.g. a local apply on a
    /// communication qubit).
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("transport failure: {0}")]
    Transport(String),
}

pub type Result<T, E = SimError> = std::result::Result<T, E>;
