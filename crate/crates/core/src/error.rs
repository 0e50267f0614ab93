use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("state has already been transformed")]
    AlreadyTransformed,

    #[error("state has not been transformed yet")]
    NotTransformed,

    #[error("unsupported configuration: {0}")]
    UnsupportedConfiguration(String),

    #[error("postselection impossible: success probability {0:e} is zero")]
    PostselectionImpossible(f64),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("gram matrix is not positive semidefinite (min eigenvalue {0:e})")]
    GramNotPsd(f64),

    #[error("matrix is not a valid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("measurement settings are not informationally complete: no setting measures {0}")]
    IncompleteSettings(String),

    #[error("size limit exceeded: {0}")]
    SizeLimit(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// Short stable identifier used in diagnostics.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid-input",
            Error::AlreadyTransformed | Error::NotTransformed => "invalid-state",
            Error::UnsupportedConfiguration(_) => "unsupported-configuration",
            Error::PostselectionImpossible(_) => "postselection-impossible",
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::GramNotPsd(_) => "gram-not-psd",
            Error::InvalidDensityMatrix(_) => "invalid-density-matrix",
            Error::IncompleteSettings(_) => "incomplete-settings",
            Error::SizeLimit(_) => "size-limit",
            Error::Parse { .. } => "parse-error",
        }
    }

    /// True for failures that come out of the numerics rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::PostselectionImpossible(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
