use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter out of range: {0}")]
    Domain(String),

    #[error("tail constant c = {c} is too large for alpha = {alpha}: solved p1 = {p1}, p2 = {p2}")]
    InfeasibleTail { alpha: f64, c: f64, p1: f64, p2: f64 },

    #[error("degree sum {0} is odd")]
    Parity(u64),

    #[error("graph degrees do not match the degree sequence at vertex {vertex}: expected {expected}, found {found}")]
    DegreeMismatch { vertex: usize, expected: u64, found: u64 },

    #[error("inconsistent exploration state at step {step}: {detail}")]
    State { step: usize, detail: String },

    #[error("index {index} outside walk domain of length {len}")]
    Index { index: usize, len: usize },

    #[error("function is identically zero")]
    ZeroFunction,

    #[error("rejection budget of {budget} attempts exhausted (accepted {accepted}, longest {longest})")]
    RejectionBudgetExceeded { budget: u64, accepted: usize, longest: usize },

    #[error("empty sample")]
    EmptySample,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
