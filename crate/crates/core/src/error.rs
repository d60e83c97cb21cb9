use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument is outside its documented domain.
    #[error("invalid parameter: {0}")]
    Parameter(String),
    /// The input is valid but too short for the requested analysis.
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    /// A value violates a type invariant (non-finite sample, bad interval, ...).
    #[error("validation failed: {0}")]
    Validation(String),
    /// An integrator produced a non-finite state.
    #[error("integration diverged at step {step}")]
    Divergence { step: usize },
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn short(msg: impl Into<String>) -> Self {
        Error::InsufficientData(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}
