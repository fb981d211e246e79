use thiserror::Error;

use crate::capacity::PropertyReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error("state space size {n} outside 1..={cap}")]
    SpaceSize { n: usize, cap: usize },

    #[error("subset mask {bits} does not fit a space of {n} states")]
    MaskOutOfRange { bits: u64, n: usize },

    #[error("operands live on different state spaces ({left} vs {right} states)")]
    SpaceMismatch { left: usize, right: usize },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("capacity table needs {expected} entries, got {got}")]
    TableSize { expected: usize, got: usize },

    #[error("capacity must vanish on the empty set")]
    NonzeroEmpty,

    #[error("negative value {0}")]
    Negative(String),

    #[error("set function is not monotone: {0:?}")]
    NotMonotone(Box<PropertyReport>),

    #[error("probability weights sum to {0}, expected 1")]
    NotNormalized(String),

    #[error("malformed rational {0:?}")]
    BadRational(String),

    #[error("chain is not monotone under inclusion at position {0}")]
    NonMonotoneChain(usize),

    #[error("function sequence is not increasing at term {index}")]
    NonMonotoneSequence { index: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("brute-force oracle refuses n = {0} (limit 4)")]
    OracleTooLarge(usize),

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("partition sequence is not refining at step {0}")]
    NotRefining(usize),

    #[error("not evaluable in closed form: {0}")]
    NotEvaluable(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("{0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
