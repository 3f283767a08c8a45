use std::fmt;
use std::path::PathBuf;

/// CLI-level failures, mapped onto process exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Bad input: config, flags, graph files, parameter ranges. Exit 1.
    Validation(String),
    /// A solver returned its best iterate without meeting the stopping rule;
    /// fatal only under `--strict`. Exit 2.
    NonConvergence(String),
    /// Filesystem trouble. Exit 1.
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::Io { .. } => 1,
            CliError::NonConvergence(_) => 2,
        }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(msg) => write!(f, "{msg}"),
            CliError::NonConvergence(msg) => write!(f, "{msg}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
        }
    }
}

impl std::error::Error for CliError {}

impl From<fastmix_core::Error> for CliError {
    fn from(e: fastmix_core::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}
