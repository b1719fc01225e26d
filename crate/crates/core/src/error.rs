use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A stepsize admissibility inequality does not hold.
    #[error("stepsize condition violated: {condition} (value {value:.6e})")]
    StepSize { condition: &'static str, value: f64 },

    /// The problem does not satisfy a scheme's structural requirement
    /// (missing smooth term, zero modulus, ...).
    #[error("rejected configuration: {0}")]
    Configuration(String),

    #[error("{what} did not converge after {iterations} iterations (residual {residual:.3e})")]
    NotConverged {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("singular system in {0}")]
    Singular(&'static str),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors that reject a run before any iteration is performed.
    pub fn is_rejection(&self) -> bool {
        matches!(self, Error::StepSize { .. } | Error::Configuration(_))
    }

    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
