use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: String,
        expected: usize,
        got: usize,
    },
    #[error("system mismatch: {0}")]
    SystemMismatch(String),
    #[error("unknown system `{0}`")]
    UnknownSystem(String),
    #[error("composite system of `{0}` and `{1}` is not registered")]
    CompositeNotRegistered(String, String),
    #[error("singular: rank {rank} < {dim}")]
    Singular { rank: usize, dim: usize },
    #[error("ill-conditioned matrix: condition number {cond:.3e} exceeds {limit:.0e}")]
    IllConditioned { cond: f64, limit: f64 },
    #[error("normalization failure: residual {residual:.3e}")]
    Normalization { residual: f64 },
    #[error("ambiguous equivalence classes: {0}")]
    AmbiguousClasses(String),
    #[error("inconsistent data: {0}")]
    Inconsistent(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("linear program failed: {0}")]
    Lp(String),
    #[error("dimension {dim} exceeds supported maximum {max}")]
    TooLarge { dim: usize, max: usize },
    #[error("degenerate cone: {0}")]
    DegenerateCone(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
