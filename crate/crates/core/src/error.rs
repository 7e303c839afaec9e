use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, PartialEq)]
pub enum Error {
    #[error("schema `{0}` is already registered")]
    DuplicateSchema(String),
    #[error("schema `{0}` has no key attributes")]
    EmptyKey(String),
    #[error("schema `{type_name}`: {reason}")]
    InvalidSchema { type_name: String, reason: String },
    #[error("unregistered object type `{0}`")]
    UnknownType(String),
    #[error("record `{record_id}` has no value for key attribute `{attribute}`")]
    MissingKey { record_id: String, attribute: String },
    #[error("duplicate relationship type `{0}`")]
    DuplicateRelationship(String),
    #[error("unknown relationship type `{0}`")]
    UnknownRelationship(String),
    #[error("relationship `{rel_name}` expects {expected} but link has {found}")]
    TypeMismatch {
        rel_name: String,
        expected: String,
        found: String,
    },
    #[error("unresolved reference: {0}")]
    Unresolved(String),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("empty graph")]
    EmptyGraph,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("no propagation factor for relationship type `{0}`")]
    MissingFactor(String),
    #[error("invalid ranking constraint: {0}")]
    InvalidRanking(String),
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("{path}: {message}")]
    InvalidFile { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn parse(path: &std::path::Path, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.to_path_buf(),
            line,
            message: message.into(),
        }
    }

    pub(crate) fn in_file(path: &std::path::Path, err: Error) -> Self {
        Error::InvalidFile {
            path: path.to_path_buf(),
            message: err.to_string(),
        }
    }
}
