use std::path::PathBuf;

use thiserror::Error;

/// Where a parsed payload came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    LocalCsv,
    RemoteFetch,
}

impl std::fmt::Display for Source {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Source::LocalCsv => f.write_str("local csv"),
            Source::RemoteFetch => f.write_str("remote fetch"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate series: all lagged values are zero")]
    DegenerateSeries,

    #[error("perfect fit: residual sum of squares is zero, error variance undefined")]
    PerfectFit,

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("laplace expansion point on the prior boundary: {0}")]
    BoundaryMode(String),

    #[error("parse error ({source_kind}) at row {row}, column '{column}': {message}")]
    Parse {
        source_kind: Source,
        row: usize,
        column: String,
        message: String,
    },

    #[error("fetch of '{key}' failed: {message}; retry later or pass a local CSV with --data")]
    Fetch { key: String, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by the input rather than by the numerics.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Numeric(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
