use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure classes; the CLI maps these onto exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Io,
    /// Input data violates a format or domain invariant.
    Data,
    /// A caller passed arguments that break an operation's precondition.
    Argument,
    /// A solver could not produce a finite answer.
    Numeric,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{file}:{line}: field `{field}`: {message}")]
    Parse {
        file: String,
        line: u64,
        field: String,
        message: String,
    },

    #[error("{0}")]
    Data(String),

    #[error("{0}")]
    InvalidArgument(String),

    #[error("token `{surface}` at {sentence_id}:{position} has no {field}")]
    MissingAnnotation {
        sentence_id: String,
        position: usize,
        surface: String,
        field: &'static str,
    },

    #[error("token-level feature in Any Text regime")]
    TokenLevelInAnyRegime,

    #[error("no shared clusters")]
    NoSharedClusters,

    #[error("underdetermined: {rows} rows for {params} parameters")]
    Underdetermined { rows: usize, params: usize },

    #[error("degenerate skip pattern: all {n} words are {class}")]
    DegenerateSkipPattern { n: usize, class: &'static str },

    #[error("undefined cosine: zero-norm {0}")]
    UndefinedCosine(&'static str),

    #[error("undefined correlation: zero variance in {0}")]
    UndefinedCorrelation(&'static str),

    #[error("feature space mismatch: {0}")]
    SpaceMismatch(String),

    #[error("{0}")]
    Numeric(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Io { .. } => ErrorKind::Io,
            Error::Parse { .. }
            | Error::Data(_)
            | Error::MissingAnnotation { .. }
            | Error::NoSharedClusters
            | Error::DegenerateSkipPattern { .. }
            | Error::Json(_) => ErrorKind::Data,
            Error::InvalidArgument(_)
            | Error::TokenLevelInAnyRegime
            | Error::SpaceMismatch(_) => ErrorKind::Argument,
            Error::Underdetermined { .. }
            | Error::UndefinedCosine(_)
            | Error::UndefinedCorrelation(_)
            | Error::Numeric(_) => ErrorKind::Numeric,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
