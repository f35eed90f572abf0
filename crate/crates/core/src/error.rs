use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A statistic whose denominator vanishes on this input.
    #[error("degenerate statistic: {0}")]
    Degenerate(String),

    /// Kernel failed one or more clauses of the connection-probability class.
    #[error("kernel violates connection-probability conditions: {}", .0.join("; "))]
    KernelCondition(Vec<String>),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("quadrature did not reach tolerance {tolerance:e}: best value {best} with error bound {bound:e}")]
    Quadrature {
        best: f64,
        bound: f64,
        tolerance: f64,
    },

    #[error("experiment failed: {0}")]
    Experiment(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn degenerate(reason: impl Into<String>) -> Self {
        Error::Degenerate(reason.into())
    }

    pub fn invalid(reason: impl Into<String>) -> Self {
        Error::InvalidInput(reason.into())
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self, Error::Degenerate(_))
    }
}
