use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("index {index} out of range (limit {limit})")]
    OutOfRange { index: usize, limit: usize },

    #[error("capacity exceeded: {bits} watermark bits but only {blocks} blocks available")]
    Capacity { bits: usize, blocks: usize },

    #[error("block {0} assigned more than once")]
    DuplicateBlock(usize),

    #[error("malformed key: {0}")]
    Key(String),

    #[error("unsupported key version {0} (expected 1)")]
    UnsupportedKeyVersion(u64),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("{0}")]
    HostsFailed(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) => crate::cli::EXIT_USAGE,
            Error::Io { .. } | Error::Image { .. } => crate::cli::EXIT_IO,
            Error::Capacity { .. } => crate::cli::EXIT_CAPACITY,
            Error::Key(_) | Error::UnsupportedKeyVersion(_) | Error::Json(_) => {
                crate::cli::EXIT_KEY
            }
            Error::Dimension(_)
            | Error::OutOfRange { .. }
            | Error::DuplicateBlock(_)
            | Error::NonFinite(_)
            | Error::HostsFailed(_) => crate::cli::EXIT_FAILURE,
        }
    }
}
