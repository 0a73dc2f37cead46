use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid breakpoint grid: {0}")]
    InvalidGrid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("point {0} lies outside [0, 1]")]
    OutOfDomain(f64),

    #[error("mass matrix is not positive definite (ill-posed generalized eigenproblem)")]
    IllPosedMass,

    #[error("{which} matrix is not symmetric (max asymmetry {asym:e})")]
    NotSymmetric { which: &'static str, asym: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("explicit tensor assembly of dimension {dim} exceeds cap {cap}; use separable_spectrum")]
    DimensionCap { dim: usize, cap: usize },

    #[error("theorem hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::IllPosedMass | Error::Hypothesis(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
