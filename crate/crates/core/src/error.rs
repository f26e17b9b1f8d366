use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the library.
///
/// `Config` is reserved for invalid parameters; everything else is a data
/// or I/O problem. The CLI maps the two families onto distinct exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("duplicate document id `{0}`")]
    DuplicateId(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("malformed CSV at row {row}: {message}")]
    Csv { row: u64, message: String },

    #[error("word `{0}` never occurs in the reference windows")]
    UndefinedWord(String),

    #[error("label `{0}` is not in the supplied label universe")]
    UnknownLabel(String),

    #[error("vocabulary mismatch: model was trained on {expected}, corpus has {found}")]
    VocabularyMismatch { expected: String, found: String },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("model artifact: {0}")]
    Artifact(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for parameter/usage problems as opposed to bad data.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
