use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A point was handed to an operation that is only defined on the open state space.
    #[error("point {point:?} lies outside the state space {space}")]
    Domain { point: Vec<f64>, space: String },

    /// Numerical routine did not meet its tolerance.
    #[error("{what} failed to converge (residual {residual:e})")]
    Numeric { what: String, residual: f64 },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    /// Monte Carlo sample carries no information (e.g. every path dead).
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }
}
