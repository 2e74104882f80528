use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the engine.
///
/// Each variant maps to one of the stable CLI exit codes through
/// [`Error::exit_code`].
#[derive(Debug, Error)]
pub enum Error {
    /// A caller violated an operation's precondition.
    #[error("usage error: {0}")]
    Usage(String),

    #[error("missing required file {}", .0.display())]
    MissingFile(PathBuf),

    #[error("{file}:{line}: {message}")]
    Parse {
        file: String,
        line: usize,
        message: String,
    },

    #[error("load error: {0}")]
    Load(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("training error: {0}")]
    Training(String),

    #[error("model error: {0}")]
    Model(String),

    #[error("io error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Prefixes the message with `context`, keeping the variant.
    pub fn with_context(self, context: &str) -> Self {
        match self {
            Error::Usage(m) => Error::Usage(format!("{context}: {m}")),
            Error::Load(m) => Error::Load(format!("{context}: {m}")),
            Error::InvalidGraph(m) => Error::InvalidGraph(format!("{context}: {m}")),
            Error::Config(m) => Error::Config(format!("{context}: {m}")),
            Error::Training(m) => Error::Training(format!("{context}: {m}")),
            Error::Model(m) => Error::Model(format!("{context}: {m}")),
            other => other,
        }
    }

    /// Process exit code: 2 input/data, 3 model, 4 configuration.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::MissingFile(_)
            | Error::Parse { .. }
            | Error::Load(_)
            | Error::InvalidGraph(_)
            | Error::Io { .. } => 2,
            Error::Model(_) => 3,
            Error::Config(_) | Error::Usage(_) | Error::Training(_) => 4,
        }
    }
}
