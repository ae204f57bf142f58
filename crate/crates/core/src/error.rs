use thiserror::Error;

use crate::expr::ExprError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unsupported dimension {0}: only 2 and 4 are supported")]
    UnsupportedDimension(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("point {point:?} lies outside the domain box")]
    OutsideDomain { point: Vec<f64> },

    #[error("q is not in the causal future of p")]
    NotCausallyRelated,

    #[error("curve parameter {value} outside [{start}, {end}]")]
    ParameterOutOfRange { value: f64, start: f64, end: f64 },

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("curve sample {index} is not future-directed causal (violation {violation:e})")]
    NotCausal { index: usize, violation: f64 },

    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),

    #[error("unsupported matrix size {0}: certificates exist for 4x4 and 8x8 only")]
    UnsupportedMatrixSize(usize),

    #[error("non-finite gradient at {point:?}")]
    NonFiniteGradient { point: Vec<f64> },

    #[error("empty grid")]
    EmptyGrid,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("internal states coincide: no separating witness is needed")]
    NoWitnessNeeded,

    #[error("{0}")]
    Expression(#[from] ExprError),

    #[error("field `{field}` is not finite at {point:?}")]
    FieldEvaluation { field: String, point: Vec<f64> },

    #[error("could not certify sampled elements: {discarded} of {requested} discarded")]
    Certification { discarded: usize, requested: usize },

    #[error("model file, line {line}, key `{key}`: {message}")]
    ModelFile { key: String, line: usize, message: String },

    #[error("csv line {line}: {message}")]
    Csv { line: usize, message: String },
}
