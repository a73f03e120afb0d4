use thiserror::Error;

/// Errors surfaced by configuration, environments and analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LlpError {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("unsupported scenario: {0}")]
    UnsupportedScenario(String),
    #[error("benchmark set is empty: {0}")]
    InfeasibleBenchmark(String),
    #[error("not enough samples: {0}")]
    InsufficientSamples(String),
    #[error("learner protocol violated: {0}")]
    OutOfOrder(&'static str),
}

impl LlpError {
    pub fn config(msg: impl Into<String>) -> Self {
        LlpError::InvalidConfig(msg.into())
    }

    /// Whether the error stems from the inputs rather than from running them.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            LlpError::InvalidConfig(_) | LlpError::DimensionMismatch { .. } | LlpError::UnsupportedScenario(_)
        )
    }

    pub(crate) fn check_dim(context: &'static str, expected: usize, got: usize) -> Result<(), Self> {
        if expected == got {
            Ok(())
        } else {
            Err(LlpError::DimensionMismatch { context, expected, got })
        }
    }
}

pub type Result<T, E = LlpError> = std::result::Result<T, E>;
