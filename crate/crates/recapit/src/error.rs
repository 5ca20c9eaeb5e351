use std::path::{Path, PathBuf};

use thiserror::Error;

/// Failure of any file-level operation, classified for CLI exit codes and API errors.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: missing file", path.display())]
    MissingFile { path: PathBuf },
    #[error("{}: schema violation at '{field}': {message}", path.display())]
    Schema {
        path: PathBuf,
        field: String,
        message: String,
    },
    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("invalid project: {0}")]
    Invariant(#[from] recapit_core::model::InvariantError),
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    NotFound(String),
    #[error("image {}: {message}", path.display())]
    Image { path: PathBuf, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn io(path: impl AsRef<Path>, source: std::io::Error) -> Self {
        if source.kind() == std::io::ErrorKind::NotFound {
            return Self::MissingFile {
                path: path.as_ref().to_path_buf(),
            };
        }
        Self::Io {
            path: path.as_ref().to_path_buf(),
            source,
        }
    }

    pub fn parse(path: impl AsRef<Path>, line: usize, message: impl Into<String>) -> Self {
        Self::Parse {
            path: path.as_ref().to_path_buf(),
            line,
            message: message.into(),
        }
    }

    pub fn invalid(message: impl Into<String>) -> Self {
        Self::Invalid(message.into())
    }

    /// Process exit status: 1 for bad input, 2 for filesystem trouble.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Io { .. } | Self::MissingFile { .. } => 2,
            _ => 1,
        }
    }
}
