use thiserror::Error;

use walkgate_core::Error as CoreError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("graph validation failed: {0}")]
    Graph(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// Distinct exit codes per failure class.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Graph(_) => 3,
            CliError::Io(_) => 9,
            CliError::Usage(_) => 10,
            CliError::Core(core) => match core {
                CoreError::InvalidGraph(_) => 3,
                CoreError::DoubleResonance { .. } | CoreError::InvalidArgument(_) => 4,
                CoreError::NotHermitian { .. }
                | CoreError::NotUnitary { .. }
                | CoreError::LeakageExceeded { .. }
                | CoreError::DimensionMismatch(..)
                | CoreError::Linalg(_) => 5,
                CoreError::DegenerateRotation(_)
                | CoreError::ConditionViolated { .. }
                | CoreError::ProtectedVertices(_)
                | CoreError::NoMatch { .. }
                | CoreError::AmbiguousMatch { .. } => 6,
                CoreError::InfeasibleIntegers(_)
                | CoreError::RefinementStalled { .. }
                | CoreError::Synthesis(_) => 7,
            },
        }
    }
}
