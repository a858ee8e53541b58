use std::path::Path;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },

    #[error("invalid config: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] treemoments::Error),

    /// The model ran but does not have a required property, such as
    /// criticality.
    #[error("{0}")]
    ModelProperty(String),

    #[error("{0}")]
    Verification(String),

    #[error("output: {0}")]
    Output(String),
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::ModelProperty(_)
            | CliError::Core(treemoments::Error::Reducible { .. } | treemoments::Error::Periodic) => 2,
            CliError::Verification(_) => 3,
            _ => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Io { .. } => "io",
            CliError::Config(_) => "config",
            CliError::Core(treemoments::Error::Reducible { .. }) => "reducible",
            CliError::Core(treemoments::Error::Periodic) => "periodic",
            CliError::Core(treemoments::Error::Parse(_) | treemoments::Error::InvalidModel(_)) => "model",
            CliError::Core(_) => "runtime",
            CliError::ModelProperty(_) => "model_property",
            CliError::Verification(_) => "verification",
            CliError::Output(_) => "output",
        }
    }

    /// The single-line JSON form written to stderr.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Body<'a> {
            kind: &'a str,
            message: String,
            exit_code: u8,
        }
        #[derive(Serialize)]
        struct Wrapper<'a> {
            error: Body<'a>,
        }
        serde_json::to_string(&Wrapper {
            error: Body {
                kind: self.kind(),
                message: self.to_string(),
                exit_code: self.exit_code(),
            },
        })
        .expect("error serializes")
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Output(e.to_string())
    }
}
