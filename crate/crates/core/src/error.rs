use thiserror::Error;

/// Failures surfaced by the analysis routines.
///
/// The variants line up with the CLI exit codes: input and spec problems
/// exit 2, resource limits exit 3, diagnostic and simulation failures exit 4.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("invalid kernel spec: {0}")]
    Spec(String),
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    #[error("diagnostic failure: {message} (residual {residual:e})")]
    Diagnostic { message: String, residual: f64 },
    #[error("simulation error: {0}")]
    Simulation(String),
}

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub fn spec(msg: impl Into<String>) -> Self {
        Error::Spec(msg.into())
    }

    pub fn resource(msg: impl Into<String>) -> Self {
        Error::Resource(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
