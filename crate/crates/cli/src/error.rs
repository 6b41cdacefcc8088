use thiserror::Error;

/// Failure classes, each with its own process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("model: {0}")]
    Model(String),
    #[error("analysis: {0}")]
    Analysis(String),
    #[error("missing artifacts: {}", .0.join(", "))]
    MissingArtifacts(Vec<String>),
    #[error("i/o: {0}")]
    Io(String),
}

impl CliError {
    /// 2 configuration, 3 model, 4 estimator or optimizer, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Model(_) => 3,
            CliError::Analysis(_) => 4,
            CliError::MissingArtifacts(_) | CliError::Io(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Model(_) => "model",
            CliError::Analysis(_) => "analysis",
            CliError::MissingArtifacts(_) => "missing_artifacts",
            CliError::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub(crate) fn analysis(e: subscale_core::Error) -> CliError {
    CliError::Analysis(e.to_string())
}

pub(crate) fn model(e: subscale_core::Error) -> CliError {
    CliError::Model(e.to_string())
}
