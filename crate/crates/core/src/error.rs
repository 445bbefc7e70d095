use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("operands belong to different fields")]
    FieldMismatch,
    #[error("zero element has no {0}")]
    ZeroInput(&'static str),
    #[error("trivial square class does not define a field extension")]
    TrivialExtension,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("malformed representative: {0}")]
    Malformed(String),
    #[error("no splitting found: {0}")]
    NotFound(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
