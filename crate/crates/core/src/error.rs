use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("pole collision: {0}")]
    PoleCollision(String),
    #[error("delta vanishes at {0}")]
    ZeroDelta(String),
    #[error("invalid boundary parameters: {0}")]
    InvalidParams(String),
    #[error("invalid chain configuration: {0}")]
    InvalidChain(String),
    #[error("r-tilde construction mismatch: conjugated and explicit forms differ (deviation {0:e})")]
    ConstructionMismatch(f64),
    #[error("B-hat is singular")]
    SingularBhat,
    #[error("regime mismatch: {0}")]
    RegimeMismatch(String),
    #[error("eigenvalue iteration did not converge: {0}")]
    NoConvergence(String),
    #[error("zero vector")]
    ZeroVector,
    #[error("pole guard violated: {0}")]
    PoleGuardViolation(String),
    #[error("dimension {0} exceeds the dimension cap of {1}")]
    DimensionCap(usize, usize),
}

pub type Result<T> = std::result::Result<T, Error>;
