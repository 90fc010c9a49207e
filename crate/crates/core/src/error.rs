use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("chart mismatch: [{left}] vs [{right}]")]
    ChartMismatch { left: String, right: String },

    #[error("variable index {index} out of range for chart of dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("rejected input: {0}")]
    InvalidInput(String),

    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("not a weak symmetry: {0}")]
    NotAWeakSymmetry(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    /// `identity` is the relation that should hold, e.g. `d chi = omega`.
    #[error("consistency violation: {}, residual {residual}", violated(identity))]
    Consistency { identity: String, residual: String },

    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },

    #[error("internal consistency error: {0}")]
    Internal(String),
}

fn violated(identity: &str) -> String {
    match identity.split_once(" = ") {
        Some((lhs, rhs)) => format!("{lhs} != {rhs}"),
        None => format!("`{identity}` fails"),
    }
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
