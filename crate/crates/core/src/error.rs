use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    InvalidDimension { expected: usize, found: usize },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("principal logarithm undefined: spectrum meets the closed negative real axis")]
    PrincipalLogUndefined,

    #[error("matrix is not in the span of the algebra basis (residual {residual:e})")]
    NotInAlgebra { residual: f64 },

    #[error("matrix violates the group relations (residual {residual:e})")]
    NotInGroup { residual: f64 },

    #[error("sigma is not a linear isomorphism")]
    NotAnIsomorphism,

    #[error("invalid mutation: {0}")]
    InvalidMutation(String),

    #[error("invalid algebra: {0}")]
    InvalidAlgebra(String),

    #[error("metric signature at {at:?} is {found:?}, expected {expected:?}")]
    SignatureError {
        expected: (usize, usize),
        found: (usize, usize),
        at: Vec<f64>,
    },

    #[error("degenerate metric at {at:?}")]
    DegenerateMetric { at: Vec<f64> },

    #[error("unknown model `{0}`")]
    UnknownModel(String),

    #[error("parse error at offset {offset}: {message}")]
    ParseError { offset: usize, message: String },

    #[error("unknown symbol `{name}` at offset {offset}")]
    UnknownSymbol { name: String, offset: usize },

    #[error("point {x:?} is outside the chart domain")]
    OutOfChart { x: Vec<f64> },

    #[error("field evaluation failed: {0}")]
    FieldError(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("curve domain error: {0}")]
    DomainError(String),

    #[error("format error: {0}")]
    Format(String),
}
