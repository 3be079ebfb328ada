use thiserror::Error;

/// Errors produced by the two-scale library.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    /// Fixed-point iteration hit its cap without meeting the tolerance.
    #[error(
        "fixed-point iteration did not converge{}: {iterations} iterations, residual {residual:e}",
        step.map(|s| format!(" at step {s}")).unwrap_or_default()
    )]
    Convergence {
        step: Option<u64>,
        iterations: usize,
        residual: f64,
        /// Residual after each iteration (most recent last, truncated to the last 16).
        trace: Vec<f64>,
    },

    /// An iterate or a state became non-finite.
    #[error(
        "divergence (non-finite values){} after {iterations} iterations",
        step.map(|s| format!(" at step {s}")).unwrap_or_default()
    )]
    Divergence { step: Option<u64>, iterations: usize },

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("config error for `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Attach a step index to iteration errors.
    pub fn at_step(self, index: u64) -> Self {
        match self {
            Error::Convergence {
                iterations,
                residual,
                trace,
                ..
            } => Error::Convergence {
                step: Some(index),
                iterations,
                residual,
                trace,
            },
            Error::Divergence { iterations, .. } => Error::Divergence {
                step: Some(index),
                iterations,
            },
            other => other,
        }
    }

    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
