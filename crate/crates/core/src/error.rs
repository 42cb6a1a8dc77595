use thiserror::Error;

/// Errors raised across graph handling, inference, training and explanation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid selection: {0}")]
    InvalidSelection(String),

    #[error("unknown edge index {index} (graph has {count} edges)")]
    UnknownEdge { index: usize, count: usize },

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("enumeration too large: {edges} edges exceeds cap {cap}")]
    EnumerationTooLarge { edges: usize, cap: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("training diverged at epoch {epoch} (loss {loss}); try a smaller learning rate")]
    Diverged { epoch: usize, loss: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("undefined score: {0}")]
    UndefinedScore(String),

    #[error("empty subgraph rejected by policy")]
    EmptySubgraph,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// True for failures that stem from floating point blow-ups rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NumericalFailure(_) | Error::Diverged { .. })
    }
}
