use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("degenerate matrix: {0}")]
    DegenerateMatrix(String),

    #[error("degenerate support: sub-matrix on the given support is rank deficient")]
    DegenerateSupport,

    #[error("degenerate range: all measurements are zero")]
    DegenerateRange,

    #[error("invalid value at index {index}: {value}")]
    InvalidValue { index: usize, value: f64 },

    #[error("bit-depth {0} outside the bound's domain (requires B >= 2)")]
    OutOfDomain(u32),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
