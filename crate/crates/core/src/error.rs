use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("no cell center of the lattice with h = {h} lies inside the domain")]
    EmptyGrid { h: f64 },

    #[error("point {0:?} is not inside the domain")]
    OutsideDomain(Vec<f64>),

    #[error("stability index {0} is outside the open interval (0, 2)")]
    InvalidAlpha(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grid has {n} cells, above the dense limit of {max}")]
    TooManyCells { n: usize, max: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("linear solve stalled at relative residual {residual:e}")]
    SolveDidNotConverge { residual: f64 },

    #[error("QL iteration did not converge for eigenvalue {index}")]
    EigenNoConvergence { index: usize },

    #[error("not enough data: {0}")]
    InsufficientData(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("at alpha = {alpha}, h = {h}: {source}")]
    Sweep {
        alpha: f64,
        h: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
