use thiserror::Error;

use crate::lie::AlgebraKind;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("kind mismatch: {left} vs {right}")]
    KindMismatch { left: AlgebraKind, right: AlgebraKind },

    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid value: {0}")]
    Invalid(String),

    #[error("matrix is not in the {kind} block pattern (residual {residual:e})")]
    NotInAlgebra { kind: AlgebraKind, residual: f64 },

    #[error("unsupported scenario for {op}: {scenario}")]
    Unsupported { op: &'static str, scenario: String },

    #[error("layout mismatch: {0}")]
    Layout(String),

    #[error("degenerate dynamics: {0}")]
    Degenerate(String),

    #[error("singular tetrad at {0:?}")]
    SingularTetrad(Vec<f64>),

    #[error("config error ({job}): {message}")]
    Config { job: String, message: String },

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
