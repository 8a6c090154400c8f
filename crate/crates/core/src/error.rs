use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty sequence body for \"{0}\"")]
    EmptySequence(String),
    #[error("duplicate record id \"{0}\"")]
    DuplicateId(String),
    #[error("no label for record \"{0}\"")]
    MissingLabel(String),
    #[error("record \"{id}\": invalid residue {residue:?}")]
    InvalidResidue { id: String, residue: char },
    #[error("malformed FASTA: {0}")]
    MalformedFasta(String),
    #[error("class \"{0}\" has fewer than 2 records")]
    ClassTooSmall(String),
    #[error("sequence length {len} exceeds maximum length {max_len}")]
    SequenceTooLong { len: usize, max_len: usize },
    #[error("symbol {0:?} is not in the alphabet and no fallback symbol is set")]
    UnknownSymbol(char),
    #[error("series of length {len} too short: need at least {required}")]
    SeriesTooShort { len: usize, required: usize },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("non-finite loss at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("invalid checkpoint: {0}")]
    Checkpoint(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Image(#[from] image::ImageError),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
