use std::path::PathBuf;

/// Errors produced by the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid grid shape {height}x{width}")]
    InvalidShape { height: usize, width: usize },

    #[error("shape mismatch: expected {expected}, got {actual}")]
    ShapeMismatch { expected: String, actual: String },

    #[error("unknown instance {0}")]
    UnknownInstance(u16),

    #[error("too many instances: {0} exceeds the limit of 65534")]
    TooManyInstances(usize),

    #[error("degenerate region: empty boundary")]
    DegenerateRegion,

    #[error("degenerate embedding at pixel ({row}, {col})")]
    DegenerateEmbedding { row: usize, col: usize },

    #[error("degenerate prototype for instance {0}")]
    DegeneratePrototype(u16),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("malformed file {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for errors caused by reading or decoding files rather than by
    /// invalid values.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. } | Error::Format { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
