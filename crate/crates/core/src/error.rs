use thiserror::Error;

#[derive(Debug, Error)]
pub enum AlignError {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("sinkhorn did not converge in {iterations} iterations (marginal violation {violation:e})")]
    NotConverged { iterations: usize, violation: f64 },

    #[error("transport solver failed: {0}")]
    Solver(String),

    #[error("dummy-to-dummy flow {flow:e} exceeds tolerance; the big-cost stand-in is too small")]
    DummyFlow { flow: f64 },

    #[error("singular value decomposition failed")]
    Svd,

    #[error("non-finite objective encountered in round {round}")]
    NonFinite { round: usize },

    #[error("{}: {source}", path.display())]
    File { path: std::path::PathBuf, source: std::io::Error },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl AlignError {
    /// True for failures caused by malformed input or arguments rather than
    /// by the numerical routines.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            AlignError::DimensionMismatch { .. }
                | AlignError::InvalidInput(_)
                | AlignError::Parse { .. }
                | AlignError::File { .. }
                | AlignError::Io(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, AlignError>;
