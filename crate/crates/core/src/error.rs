use std::path::PathBuf;

use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("token {token} at line {line} is outside the vocabulary of size {vocab}")]
    VocabularyViolation {
        line: usize,
        token: u64,
        vocab: usize,
    },

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("row {row} of the bigram counts is empty and alpha = 0")]
    DegenerateRow { row: usize },

    #[error("invalid transition file: {0}")]
    Format(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("brute-force search over {paths} paths exceeds the limit of {limit}")]
    SearchTooLarge { paths: u128, limit: u64 },

    #[error("replay source exhausted after {steps} steps")]
    ReplayUnderrun { steps: usize },

    #[error("head source produced an invalid distribution: {0}")]
    Source(String),

    #[error(
        "zero probability assigned to target token {token} (head {head}, position {position})"
    )]
    InfiniteLoss {
        position: usize,
        head: usize,
        token: u32,
    },

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 1 for user or input errors, 2 for internal invariant violations.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Internal(_) | Error::Numeric(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
