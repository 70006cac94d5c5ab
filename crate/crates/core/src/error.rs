use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The requested quantity has no value for this input (zero total
    /// persistence, too few bars, ...).
    #[error("undefined result: {0}")]
    Undefined(String),

    #[error("barcodes have different numbers of bars: {left} vs {right}")]
    CardinalityMismatch { left: usize, right: usize },

    #[error("no bar of length {0} in the barcode")]
    NotAMember(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

pub(crate) fn undefined(msg: impl Into<String>) -> Error {
    Error::Undefined(msg.into())
}
