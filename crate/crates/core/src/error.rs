use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("matrix is singular to working precision")]
    Singular,

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("invalid topology: {0}")]
    InvalidTopology(String),

    #[error("invalid step size: {0}")]
    InvalidStepSize(String),

    #[error("graph has no edges (largest Laplacian eigenvalue is zero)")]
    EdgelessGraph,

    #[error("eigenvalue iteration did not converge after {0} sweeps")]
    NoConvergence(usize),

    #[error("pair (A, B) is not controllable")]
    NotControllable,

    #[error("regulator equations have no solution: rank [A-I B; C 0] is below n+q")]
    RankCondition,

    #[error("regulator residual {residual:e} exceeds {tolerance:e}")]
    RegulatorResidual { residual: f64, tolerance: f64 },

    #[error("feedback synthesis failed: {0}")]
    Synthesis(String),

    #[error("closed-loop matrix A-BK is not certified Schur stable")]
    NotSchur,

    #[error("invalid cost: {0}")]
    InvalidCost(String),

    #[error("invalid scenario: {0}")]
    Scenario(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("scenario parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
