use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    /// The requested combination of geometry, regularizer or set has no closed-form solver.
    #[error("unsupported combination: {0}")]
    Capability(String),

    #[error("numerical failure: {message} (residual {residual:e})")]
    Numerical { message: String, residual: f64 },

    #[error("accuracy {eps:e} is unattainable: {reason}")]
    Unattainable { eps: f64, reason: String },

    #[error("sampling produced a non-finite value at {point:?}")]
    Sampling { point: Vec<f64> },

    #[error("oracle returned a non-finite value at {point:?}")]
    Oracle { point: Vec<f64> },

    #[error("line search exceeded {max_doublings} doublings at iteration {iteration} (last i = {last_i})")]
    LineSearch {
        iteration: usize,
        last_i: u32,
        max_doublings: u32,
    },

    /// An online certificate that must hold by construction was violated.
    #[error("internal invariant `{name}` violated at iteration {iteration}: lhs {lhs:e} > rhs {rhs:e}")]
    Invariant {
        name: String,
        iteration: usize,
        lhs: f64,
        rhs: f64,
    },

    #[error("unknown problem `{0}`")]
    Catalog(String),

    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse {
            row: e.line(),
            message: e.to_string(),
        }
    }
}
