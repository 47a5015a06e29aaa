use std::process::ExitCode;

use rdens_core::Error;
use thiserror::Error as ThisError;

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl CliError {
    pub fn class(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Core(e) => e.class(),
            CliError::Io(_) => "io",
        }
    }

    /// 2 for bad input, 3 for numerical or sampling failures, 1 for I/O.
    pub fn exit_code(&self) -> ExitCode {
        let code = match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) => match e {
                Error::InvalidArgument(_)
                | Error::Unsupported(_)
                | Error::NotRealizable(_)
                | Error::Nonphysical(_) => 2,
                Error::NumericalFailure(_) | Error::Configuration(_) | Error::EmptyEnsemble(_) => 3,
            },
            CliError::Io(_) => 1,
        };
        ExitCode::from(code)
    }

    /// One-line JSON diagnostic for stderr.
    pub fn to_json(&self) -> String {
        serde_json::json!({ "error_class": self.class(), "message": self.to_string() }).to_string()
    }
}
