use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("coordinate {index} is outside the truncation 1..={dim}")]
    OutOfTruncation { index: usize, dim: usize },

    #[error("invalid value for `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("time {0} is not a point of the grid")]
    NotOnGrid(f64),

    #[error("ensemble of {requested} cells exceeds the capacity limit of {limit}")]
    Capacity { requested: u128, limit: u128 },

    #[error("{unit} unit cannot be evaluated on a {model} model")]
    IncompatibleUnit {
        unit: &'static str,
        model: &'static str,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("probe matrix is singular after {attempts} attempts (last condition number {condition:e})")]
    SingularSystem { attempts: usize, condition: f64 },

    #[error("covariance is not positive definite: eigenvalue {index} is {eigenvalue:e}")]
    NotPositiveDefinite { index: usize, eigenvalue: f64 },

    #[error("decode error: {0}")]
    Decode(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }
}
