use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),

    #[error("malformed record at line {line}: {reason}")]
    MalformedRecord { line: usize, reason: String },

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("invalid document {id:?}: {reason}")]
    InvalidDocument { id: String, reason: String },

    #[error("duplicate document id {0:?}")]
    DuplicateId(String),

    #[error("unknown field {0:?}")]
    UnknownField(String),

    #[error("meta key {0:?} already exists")]
    DuplicateMetaKey(String),

    #[error("invalid lookup table: {0}")]
    InvalidLookup(String),

    #[error("no token meets the vocabulary criteria")]
    EmptyVocabulary,

    #[error("too few units: need at least {need}, have {have}")]
    TooFewDocuments { need: usize, have: usize },

    #[error("model schema version {found} is not supported (expected {expected})")]
    SchemaVersionMismatch { found: u64, expected: u64 },

    #[error("corrupt model: {0}")]
    CorruptModel(String),

    #[error("likelihood is flat in alpha; the mixture fraction is not identifiable")]
    FlatLikelihood,

    #[error("insufficient {kind} pool: need {need}, have {have}")]
    InsufficientPool {
        kind: &'static str,
        need: usize,
        have: usize,
    },

    #[error("holdout document {0:?} was used to train the model")]
    TrainTestOverlap(String),

    #[error("transport error: {0}")]
    Transport(String),

    #[error("rate limited by endpoint")]
    RateLimited,

    #[error("model returned an empty response")]
    EmptyResponse,

    #[error("invalid skeleton for {0:?}: no bullets")]
    InvalidSkeleton(String),

    #[error("document {id:?} is missing field {field:?}")]
    MissingField { id: String, field: String },

    #[error("every document failed ({0} failures)")]
    AllFailed(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Short stable identifier used in machine-readable error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::FileNotFound(_) => "FileNotFound",
            Error::MalformedRecord { .. } => "MalformedRecord",
            Error::EmptyCorpus => "EmptyCorpus",
            Error::InvalidDocument { .. } => "InvalidDocument",
            Error::DuplicateId(_) => "DuplicateId",
            Error::UnknownField(_) => "UnknownField",
            Error::DuplicateMetaKey(_) => "DuplicateMetaKey",
            Error::InvalidLookup(_) => "InvalidLookup",
            Error::EmptyVocabulary => "EmptyVocabulary",
            Error::TooFewDocuments { .. } => "TooFewDocuments",
            Error::SchemaVersionMismatch { .. } => "SchemaVersionMismatch",
            Error::CorruptModel(_) => "CorruptModel",
            Error::FlatLikelihood => "FlatLikelihood",
            Error::InsufficientPool { .. } => "InsufficientPool",
            Error::TrainTestOverlap(_) => "TrainTestOverlap",
            Error::Transport(_) => "TransportError",
            Error::RateLimited => "RateLimited",
            Error::EmptyResponse => "EmptyResponse",
            Error::InvalidSkeleton(_) => "InvalidSkeleton",
            Error::MissingField { .. } => "MissingField",
            Error::AllFailed(_) => "AllFailed",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::Io(_) => "IoError",
            Error::Json(_) => "JsonError",
            Error::Csv(_) => "CsvError",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
