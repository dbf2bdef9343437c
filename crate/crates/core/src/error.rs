use thiserror::Error;

/// Errors raised across the model, checker, solvers and analysis layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid problem specification: {0}")]
    Spec(String),

    #[error("coefficient evaluation failed: {0}")]
    Coefficient(String),

    #[error("solver failure at t = {time}: {reason}")]
    Solver { time: f64, reason: String },

    #[error("nested-box sequence did not converge: {0}")]
    NonConvergence(String),

    #[error("refinement differences are indistinguishable ({0:e})")]
    DegenerateRefinement(f64),

    #[error("argument outside the domain of definition: {0}")]
    Domain(String),

    #[error("Picard iteration is not contracting: {0}")]
    NonContraction(String),

    #[error("interaction coefficient is not positive: {0}")]
    DivisionDomain(String),

    #[error("time integral does not converge: {0}")]
    Integrability(String),

    #[error("configuration error at {pointer}: {message}")]
    Config { pointer: String, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn spec(msg: impl Into<String>) -> Self {
        Error::Spec(msg.into())
    }

    pub(crate) fn coefficient(msg: impl Into<String>) -> Self {
        Error::Coefficient(msg.into())
    }

    pub(crate) fn solver(time: f64, reason: impl Into<String>) -> Self {
        Error::Solver { time, reason: reason.into() }
    }

    pub(crate) fn config(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config { pointer: pointer.into(), message: message.into() }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
