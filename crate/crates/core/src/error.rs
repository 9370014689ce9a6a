use thiserror::Error;

/// Error type shared by all modules of the crate.
///
/// The variants correspond to the distinct failure categories surfaced by the
/// command-line front end: bad inputs, parse problems, exhausted resource
/// budgets, violated search promises and failed calibrations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("resource cap exceeded: {0}")]
    Resource(String),
    #[error("promise violation: {0}")]
    Promise(String),
    #[error("calibration failure: {0}")]
    Calibration(String),
    #[error("degenerate outcome: {0}")]
    Degenerate(String),
}

impl Error {
    /// Process exit code used by the CLI for this error category.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Input(_) | Error::Parse(_) | Error::Degenerate(_) => 2,
            Error::Resource(_) => 3,
            Error::Promise(_) => 4,
            Error::Calibration(_) => 5,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
