use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A value lies outside the mathematical domain of an operation.
    #[error("domain error at index {index}: {msg}")]
    Domain { index: usize, msg: String },

    /// Input length violates an operation's size precondition.
    #[error("size error: {0}")]
    Size(String),

    /// A symbol, digit or parameter is out of its permitted range.
    #[error("range error: {0}")]
    Range(String),

    /// A value outside a bounds table, reported with its position.
    #[error("value {value} at index {index} lies outside the bounds table")]
    OutOfBounds { index: usize, value: f64 },

    /// Input that is structurally valid but carries no information (constant series).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A compressed blob or serialized file failed validation.
    #[error("integrity error: {0}")]
    Integrity(String),

    /// Numeric failure such as a singular regression.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Malformed text input.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Invalid pipeline configuration.
    #[error("config error: {0}")]
    Config(String),

    /// A pipeline stage failed; wraps the underlying cause.
    #[error("stage {stage} ({transform}) failed: {source}")]
    Stage {
        stage: usize,
        transform: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Coarse class used by front ends to pick an exit status.
    pub fn is_numeric(&self) -> bool {
        match self {
            Error::Numeric(_) => true,
            Error::Stage { source, .. } => source.is_numeric(),
            _ => false,
        }
    }
}
