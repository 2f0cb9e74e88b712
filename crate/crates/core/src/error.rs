use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("format error at row {row}: {message}")]
    Format { row: usize, message: String },

    #[error("parse error at row {row}, column {column}: cannot read {token:?} as a number")]
    Parse {
        row: usize,
        column: usize,
        token: String,
    },

    #[error("shape error: {0}")]
    Shape(String),

    #[error("size error: {0}")]
    Size(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("unsupported dimension {0}: simplices are built up to dimension 3")]
    UnsupportedDimension(usize),

    #[error("filtration integrity error: {0}")]
    Integrity(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("snapshot {label}: {source}")]
    Snapshot {
        label: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable name of the error class.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::EmptyInput(_) => "empty-input",
            Error::Format { .. } => "format",
            Error::Parse { .. } => "parse",
            Error::Shape(_) => "shape",
            Error::Size(_) => "size",
            Error::Parameter(_) => "parameter",
            Error::UnsupportedDimension(_) => "unsupported-dimension",
            Error::Integrity(_) => "integrity",
            Error::Degenerate(_) => "degenerate-input",
            Error::Io { .. } => "io",
            Error::Snapshot { source, .. } | Error::File { source, .. } => source.kind(),
            Error::Json(_) => "json",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn in_file(self, path: impl Into<PathBuf>) -> Self {
        match self {
            e @ Error::Io { .. } => e,
            other => Error::File {
                path: path.into(),
                source: Box::new(other),
            },
        }
    }
}
