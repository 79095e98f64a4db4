use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("unsupported field: {0}")]
    UnsupportedField(String),
    #[error("invalid field descriptor: {0}")]
    InvalidField(String),
    #[error("field mismatch: {0}")]
    FieldMismatch(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("duplicate point at label {0}")]
    DuplicatePoint(usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("genericity exhausted after {0} attempts")]
    GenericityExhausted(usize),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("no curve: {0}")]
    NoCurve(String),
    #[error("action error: {0}")]
    Action(String),
    #[error("mathematical assertion failed: {0}")]
    MathAssertion(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// True for failures that indicate a potential counterexample rather than bad input.
    pub fn is_math_assertion(&self) -> bool {
        matches!(self, Error::MathAssertion(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
