use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("basis vectors are linearly dependent (relative residual {residual:.3e})")]
    DependentInput { residual: f64 },
    #[error("irreducibility check supports dimension at most 16, got {0}")]
    DimensionTooLarge(usize),
    #[error("order interval thresholds must satisfy lo <= 0 <= hi: {0}")]
    BadThreshold(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("matrix exponential overflow")]
    Overflow,
    #[error("invalid projection: {0}")]
    InvalidProjection(String),
    #[error("invalid coupling matrix: {0}")]
    InvalidCoupling(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("state layout mismatch: {0}")]
    LayoutMismatch(String),
    #[error("singular linear system")]
    SingularSystem,
    #[error("system has {dofs} degrees of freedom, limit is {limit}")]
    TooLarge { dofs: usize, limit: usize },
    #[error("eigensolver failure: {0}")]
    EigFailure(String),
    #[error("eigensolver did not converge: {0}")]
    ConvergenceFailure(String),
    #[error("rank mismatch: {0} vs {1}")]
    RankMismatch(usize, usize),
    #[error("systems are not comparable: {0}")]
    ConfigMismatch(String),
    #[error("grid step must lie in (0, pi/4], got {0}")]
    BadStep(f64),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
