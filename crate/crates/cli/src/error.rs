use gca_core::error::Error as EngineError;
use thiserror::Error;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: parse error at line {line}, column {column}: {message}")]
    Parse { path: String, line: usize, column: usize, message: String },
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("{0}")]
    Engine(#[from] EngineError),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl CliError {
    pub fn validation(what: impl Into<String>) -> Self {
        CliError::Validation(what.into())
    }

    /// Attaches the name of the offending problem-file entry to an engine error.
    pub fn context(what: &str, e: EngineError) -> Self {
        if e.is_budget() {
            CliError::Engine(e)
        } else {
            CliError::Validation(format!("{what}: {e}"))
        }
    }

    /// 2 when a budget ran out, 3 for invalid input, 1 for anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Validation(_) => 3,
            CliError::Engine(e) if e.is_budget() => 2,
            CliError::Engine(
                EngineError::ConfigNotInShift
                | EngineError::DimensionMismatch { .. }
                | EngineError::ShapeMismatch
                | EngineError::NotOneDimensional
                | EngineError::Invalid(_),
            ) => 3,
            _ => 1,
        }
    }
}
