use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse error class, mapped onto process exit codes by the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Data,
    Numeric,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Config => 2,
            ErrorKind::Data => 3,
            ErrorKind::Numeric => 4,
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
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
    #[error("duplicate provision id `{0}`")]
    DuplicateId(String),
    #[error("unknown provision id `{0}`")]
    UnknownId(String),
    #[error("class `{class}` is not in the label set [{allowed}]")]
    UnknownClass { class: String, allowed: String },
    #[error("missing id `{0}`")]
    MissingId(String),
    #[error("unexpected id `{0}`")]
    ExtraId(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("zero vector has no direction")]
    ZeroVector,
    #[error("EMB1: {0}")]
    Emb1(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("config: {0}")]
    Config(String),
    #[error("missing artifact `{artifact}`; run `{producer}` first")]
    MissingArtifact { artifact: String, producer: String },
    #[error(
        "artifact `{artifact}` was produced by config {found}, current config is {expected} (use --force to override)"
    )]
    ConfigHashMismatch {
        artifact: String,
        expected: String,
        found: String,
    },
    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidParameter(_)
            | Error::Config(_)
            | Error::MissingArtifact { .. }
            | Error::ConfigHashMismatch { .. } => ErrorKind::Config,
            Error::Numeric(_) => ErrorKind::Numeric,
            Error::Stage { source, .. } => source.kind(),
            _ => ErrorKind::Data,
        }
    }
}
