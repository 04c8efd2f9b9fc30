use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("division by exact zero")]
    DivisionByZero,
    #[error("variable mismatch: {0}")]
    VariableMismatch(String),
    #[error("top degree: {0}")]
    TopDegree(String),
    #[error("degree overflow: {0} + {1} exceeds the number of variables")]
    DegreeOverflow(usize, usize),
    #[error("truncation underflow: {0}")]
    Truncation(String),
    #[error("zero form")]
    ZeroForm,
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("nothing to blow up: {0}")]
    NothingToBlowUp(String),
    #[error("family not in expected shape: {0}")]
    UnexpectedShape(String),
    #[error("not singular: {0}")]
    NotSingular(String),
    #[error("not pre-simple: {0}")]
    NotPreSimple(String),
    #[error("double root: {0}")]
    DoubleRoot(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("not dicritical: {0}")]
    NotDicritical(String),
    #[error("radius too large: {0}")]
    RadiusTooLarge(String),
    #[error("transversality lost: {0}")]
    TransversalityLost(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("dicritical component: {0}")]
    Dicritical(String),
    #[error("pole: {0}")]
    Pole(String),
}

pub type Result<T> = std::result::Result<T, Error>;
