use thiserror::Error;

/// Errors produced anywhere in the optimizer pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QagsError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid arity: expected {expected}, got {got}")]
    InvalidArity { expected: String, got: usize },

    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: u64, limit: u64 },

    #[error("point {0:?} is not on the grid")]
    NoSuchPoint(Vec<f64>),

    #[error("objective returned a non-finite value at {point:?}")]
    Evaluation { point: Vec<f64> },

    #[error("iteration {iteration}: {source}")]
    Iteration {
        iteration: usize,
        #[source]
        source: Box<QagsError>,
    },

    #[error("refinement hit a non-finite objective value; last feasible iterate {last:?}")]
    Refinement { last: Vec<f64>, value: f64 },

    #[error("unknown function `{name}` (available: {available})")]
    UnknownFunction { name: String, available: String },

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, QagsError>;
