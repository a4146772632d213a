use thiserror::Error;

/// Failure of a run, sorted by exit code.
#[derive(Debug, Error)]
pub enum RunError {
    /// Malformed or empty config (exit 2).
    #[error("config error: {0}")]
    Schema(String),
    /// Physics or numerics failure from the core library (exit 3 or 4).
    #[error(transparent)]
    Core(#[from] iongate_core::Error),
    /// IO and everything else (exit 1).
    #[error(transparent)]
    Other(#[from] anyhow::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Schema(_) => 2,
            RunError::Core(e) if e.is_physics_precondition() => 3,
            RunError::Core(e) if e.is_numeric_failure() => 4,
            RunError::Core(_) => 2,
            RunError::Other(_) => 1,
        }
    }
}
