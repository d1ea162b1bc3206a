use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A corpus or log record could not be decoded. `record` is 1-based.
    #[error("parse error in record {record}: {message}")]
    Parse { record: usize, message: String },

    #[error("duplicate recipe id `{0}`")]
    DuplicateId(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("integrity error: {0}")]
    Integrity(String),

    #[error("transport error: {0}")]
    Transport(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("template error: {0}")]
    Template(String),

    /// Generator output did not follow the `Nombre/Ingredientes/Pasos` layout.
    #[error("unparseable recipe output (missing `{missing}`)")]
    RecipeFormat { missing: &'static str, raw: String },

    #[error("sequencing error for `{source_id}`: expected index {expected}, got {got}")]
    Sequencing {
        source_id: String,
        expected: u64,
        got: u64,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
