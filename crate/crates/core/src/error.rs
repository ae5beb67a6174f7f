use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid direction: {0}")]
    InvalidDirection(String),

    #[error("invalid transition kernel: {0}")]
    InvalidKernel(String),

    #[error("invalid perturbation law: {0}")]
    InvalidLaw(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("gamma {gamma} outside admissible range |gamma| <= {gamma_max}")]
    GammaOutOfRange { gamma: f64, gamma_max: f64 },

    #[error("site coordinate {0} outside the packing box |z_i| < 2^20")]
    CoordinateOutOfRange(i64),

    #[error("hypothesis (H) violated: {0}")]
    HypothesisViolated(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("singular linear system: {0}")]
    SingularSystem(String),

    #[error("quadrature unstable: {0}")]
    QuadratureUnstable(String),

    #[error("series horizon too small: {0}")]
    HorizonTooSmall(String),

    #[error("enumeration budget exceeded: {needed} assignments > budget {budget}")]
    BudgetExceeded { needed: f64, budget: u64 },

    #[error("memory budget exceeded: {0}")]
    MemoryBudget(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures of a numerical method (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularSystem(_)
                | Error::QuadratureUnstable(_)
                | Error::HorizonTooSmall(_)
                | Error::MemoryBudget(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
