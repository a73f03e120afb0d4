use llp_core::LlpError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("run failed: {0}")]
    Runtime(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl RunnerError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunnerError::Config(_) => 2,
            RunnerError::Runtime(_) | RunnerError::Io { .. } => 3,
        }
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        RunnerError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

impl From<LlpError> for RunnerError {
    fn from(e: LlpError) -> Self {
        if e.is_config() {
            RunnerError::Config(e.to_string())
        } else {
            RunnerError::Runtime(e.to_string())
        }
    }
}

pub type RunnerResult<T> = Result<T, RunnerError>;
