use thiserror::Error;

use crate::group::GroupModelSpec;

#[derive(Debug, Error)]
pub enum Error {
    #[error("group model mismatch: {0} vs {1}")]
    ModelMismatch(GroupModelSpec, GroupModelSpec),

    #[error("generator count mismatch: element has {element} generators, quotient has {quotient}")]
    GeneratorCount { element: usize, quotient: usize },

    #[error("coefficient ring mismatch: {0} vs {1}")]
    RingMismatch(String, String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid group model: {0}")]
    InvalidModel(String),

    #[error("unsupported tower family {family} for group {model}")]
    UnsupportedFamily { family: String, model: String },

    #[error("invalid quotient at level {level}: {reason}")]
    InvalidQuotient { level: usize, reason: String },

    #[error("invalid tower: {0}")]
    InvalidTower(String),

    #[error("coefficient map undefined: {0}")]
    CoefficientMap(String),

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("degree {degree} out of range 0..={top}")]
    DegreeOutOfRange { degree: usize, top: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("spectral computation failed: {0}")]
    Spectral(String),

    #[error("local ring computation failed: {0}")]
    Local(String),

    #[error("p-adic fit: {0}")]
    Padic(String),

    #[error("{path}: {msg}")]
    Parse { path: String, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(path: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            msg: msg.into(),
        }
    }
}
