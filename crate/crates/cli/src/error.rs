use autocopula_core::Error as CoreError;
use thiserror::Error;

/// Failures surfaced to the user, grouped by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }

    /// Wraps a core error raised in `stage`, classified by kind.
    pub fn stage(stage: &str, e: CoreError) -> Self {
        let msg = format!("stage {stage} failed: {e}");
        match e {
            CoreError::InvalidParams(_) | CoreError::Unsupported(_) => CliError::Config(msg),
            CoreError::Domain(_) | CoreError::InsufficientData(_) => CliError::Data(msg),
            CoreError::InadmissibleMoments(_)
            | CoreError::NonConvergence { .. }
            | CoreError::Degenerate(_)
            | CoreError::RootFinding(_) => CliError::Numeric(msg),
        }
    }

    pub fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }
}

pub type CliResult<T> = Result<T, CliError>;
