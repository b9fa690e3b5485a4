use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: Vec<usize>,
        found: Vec<usize>,
    },

    #[error("coefficient count {found} does not match shape size {expected}")]
    CoeffCount { expected: usize, found: usize },

    #[error("non-finite value at position {0}")]
    NonFinite(usize),

    #[error("mode {mode} factor is not a unit vector (norm {norm})")]
    OffTorus { mode: usize, norm: f64 },

    #[error("term {0} has zero weight")]
    DegenerateTerm(usize),

    #[error("basis matrix for mode {mode} is not orthogonal (max deviation {deviation:e})")]
    NotOrthogonal { mode: usize, deviation: f64 },

    #[error("decomposition is not strongly orthogonal: {0}")]
    NotStronglyOrthogonal(String),

    #[error("component index {index} out of range for {count} terms")]
    ComponentOutOfRange { index: usize, count: usize },

    #[error("invalid solver options: {0}")]
    InvalidOptions(String),

    #[error("infeasible fixture: {0}")]
    InfeasibleFixture(String),

    #[error("serialization: {0}")]
    Serialization(String),
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Serialization(err.to_string())
    }
}
