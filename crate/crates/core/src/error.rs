use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("field mismatch: expected descriptor {expected}, found {found}")]
    FieldMismatch { expected: u64, found: u64 },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("budget exceeded: {what} needs {needed}, budget is {budget}")]
    Budget { what: String, needed: u128, budget: u128 },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("not in the orthogonal group: {0}")]
    NotOrthogonal(String),
    #[error("stage ({stage}) failed: {detail}")]
    Stage { stage: String, detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;
