use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("permutation {0:?} is reducible")]
    NotIrreducible(Vec<usize>),

    #[error("type-W sequence did not reach its stop set within d+1 steps (trace {trace:?})")]
    TypeWNonTermination { trace: Vec<usize> },

    #[error("permutation {perm:?} is not of type W (trace {trace:?})")]
    NotTypeW { perm: Vec<usize>, trace: Vec<usize> },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid interval exchange: {0}")]
    InvalidIet(String),

    #[error("point {0} lies outside the domain [0, |lambda|)")]
    OutOfDomain(String),

    #[error("invalid surface: {0}")]
    InvalidSurface(String),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("unfolding budget of {limit} nodes exceeded")]
    BudgetExceeded { limit: usize },

    /// `ratio` is the adjacent-node ratio for height quadrature and the
    /// required-to-allowed node count for correlation integrals.
    #[error("quadrature unstable: {ratio:.3e} exceeds the limit {limit:.3e}")]
    QuadratureUnstable { ratio: f64, limit: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid suspension: {0}")]
    InvalidSuspension(String),

    #[error("trajectory hit a cone point near ({x:.12}, {y:.12})")]
    SingularTrajectory { x: f64, y: f64 },

    #[error("need at least {needed} cover levels, got {found}")]
    InsufficientLevels { needed: usize, found: usize },

    #[error("inconsistent cover levels: {0}")]
    InconsistentLevels(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("unknown experiment '{0}'")]
    UnknownExperiment(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for the numerical-budget failures the CLI maps to exit code 3.
    pub fn is_numerical_budget(&self) -> bool {
        matches!(
            self,
            Error::BudgetExceeded { .. } | Error::QuadratureUnstable { .. }
        )
    }
}
