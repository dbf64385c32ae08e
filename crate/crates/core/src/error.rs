use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A value outside the mathematical domain of an operation (e.g. `ω(t)` at `t ≤ 0`).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    /// Integer cube coordinates left the exactly representable window.
    #[error("out of range: {0}; rescale the problem so that the point set and queries fit the supported window")]
    Range(String),

    /// Query point lies on the set `E`; use the trace values of the jet instead.
    #[error("query point coincides with set point {index} (distance {distance:e})")]
    OnSet { index: usize, distance: f64 },

    #[error("validation failed: {0}")]
    Validation(String),

    /// Modulus lacks the structural condition required for a vanishing scale.
    #[error("modulus rejected for the {scale} scale: {reason}")]
    ModulusRejected { scale: &'static str, reason: String },

    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
