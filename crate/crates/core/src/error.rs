use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A function was evaluated outside its domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration is recognised but not supported (e.g. H <= 1/2 for the
    /// Volterra coupling).
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// The drift does not satisfy the structural assumptions.
    #[error("inadmissible drift: {0}")]
    Inadmissible(String),

    /// Root bracketing, series or embedding failure.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Request would exceed a hard resource limit.
    #[error("resource limit: {0}")]
    Resource(String),

    /// Estimator input without variation.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit code used by the CLI: 2 for invalid input, 3 for numerical
    /// failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parameter(_)
            | Error::Domain(_)
            | Error::Unsupported(_)
            | Error::Inadmissible(_)
            | Error::Config(_)
            | Error::Io(_) => 2,
            Error::Numerical(_) | Error::Resource(_) | Error::Degenerate(_) => 3,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Parameter(msg()))
    }
}
