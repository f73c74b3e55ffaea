use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse classification of an [`Error`], used to pick a process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Argument,
    Io,
    Data,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Argument => 2,
            ErrorKind::Io => 3,
            ErrorKind::Data => 4,
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Malformed {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("sequence `{id}` has length {len}, shorter than k = {k}")]
    SequenceTooShort { id: String, len: usize, k: usize },

    #[error("duplicate sequence id `{0}`")]
    DuplicateId(String),

    #[error("corpus contains no sequences")]
    EmptyCorpus,

    #[error("sequence `{0}` is empty")]
    EmptySequence(String),

    #[error("label file references unknown sequence id `{0}`")]
    UnknownLabelId(String),

    #[error("sequence `{0}` has no label")]
    MissingLabel(String),

    #[error("invalid synthetic spec: {0}")]
    InvalidSynthSpec(String),

    #[error("0% collision is unattainable: {} k-mer pair(s) share a 32-bit digest, e.g. {:?}", pairs.len(), pairs.first())]
    IrreducibleCollision { pairs: Vec<(String, String)> },

    #[error("table-size search for target {target} exceeded {limit} probes")]
    ProbeLimitExceeded { target: f64, limit: usize },

    #[error("label `{0}` has fewer than 2 records; cannot stratify")]
    Stratification(String),

    #[error("{0}")]
    Json(#[from] serde_json::Error),

    #[error("{0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Attaches a sequence id to a [`Error::SequenceTooShort`] raised on a
    /// bare residue string.
    pub(crate) fn for_sequence(self, seq_id: &str) -> Self {
        match self {
            Error::SequenceTooShort { len, k, .. } => Error::SequenceTooShort {
                id: seq_id.to_string(),
                len,
                k,
            },
            other => other,
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidArgument(_) => ErrorKind::Argument,
            Error::Io { .. } => ErrorKind::Io,
            Error::Csv(e) if e.is_io_error() => ErrorKind::Io,
            _ => ErrorKind::Data,
        }
    }
}
