use thiserror::Error;

/// Errors produced by the numerical layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested accuracy could not be reached; carries the best estimate.
    #[error("accuracy error: {context} (best estimate {best:e}, error estimate {error_estimate:e})")]
    Accuracy {
        context: String,
        best: f64,
        error_estimate: f64,
    },

    /// A root bracket does not actually bracket a sign change.
    #[error("bracket error: no sign change of the function on [{lo}, {hi}]")]
    Bracket { lo: f64, hi: f64 },

    /// Densities cannot be combined as requested (e.g. overlapping replicas).
    #[error("composition error: {0}")]
    Composition(String),

    /// Parameter-validation failures (each entry names a violated inequality).
    #[error("invalid parameters: {}", .0.join("; "))]
    InvalidParams(Vec<String>),

    /// Malformed external input (config or density files).
    #[error("parse error: {0}")]
    Parse(String),

    /// Filesystem failure reading inputs or writing outputs.
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
