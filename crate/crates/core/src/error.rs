use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A denominator came within the configured margin of zero.
    #[error("pole hit: {0}")]
    Pole(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid deformation context: {0}")]
    InvalidContext(String),

    #[error("invalid chain: {0}")]
    InvalidChain(String),

    #[error("sampling exhausted after {attempts} consecutive rejections ({identity})")]
    SamplingExhausted { identity: String, attempts: usize },

    #[error("capacity exceeded: {what} = {value} (cap {cap})")]
    Capacity { what: &'static str, value: usize, cap: usize },

    /// A diagonal Gauss coordinate is not invertible at the requested point.
    #[error("singular Gauss coordinate k_{index} at t = {point}")]
    SingularCoordinate { index: usize, point: String },

    #[error("degenerate Bethe vector (norm {norm:e})")]
    DegenerateVector { norm: f64 },

    #[error("ill-posed decomposition: {0}")]
    IllPosed(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

impl Error {
    pub(crate) fn pole(msg: impl Into<String>) -> Self {
        Error::Pole(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
