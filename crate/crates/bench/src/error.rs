use thiserror::Error;
use tri_core::TriError;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("unknown sweep parameter '{name}' (expected one of: {expected})")]
    UnknownSweep { name: String, expected: String },
    #[error("scene file: {0}")]
    Scene(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Core(#[from] TriError),
}

pub type Result<T, E = BenchError> = std::result::Result<T, E>;
