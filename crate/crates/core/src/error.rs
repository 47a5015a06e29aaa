use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// The two trailing eigenvalues of a chart point are complex.
    #[error("not realizable: {0}")]
    NotRealizable(String),
    /// Real eigenvalues were recovered but at least one of them is negative.
    #[error("nonphysical: {0}")]
    Nonphysical(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("configuration failure: {0}")]
    Configuration(String),
    #[error("empty ensemble: {0}")]
    EmptyEnsemble(String),
}

impl Error {
    /// Stable machine-readable name of the error class.
    pub fn class(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::NotRealizable(_) => "not-realizable",
            Error::Nonphysical(_) => "nonphysical",
            Error::Unsupported(_) => "unsupported",
            Error::NumericalFailure(_) => "numerical-failure",
            Error::Configuration(_) => "configuration-failure",
            Error::EmptyEnsemble(_) => "empty-ensemble",
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
