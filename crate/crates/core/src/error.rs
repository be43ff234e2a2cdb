use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dictionary error: {0}")]
    Dictionary(String),

    #[error("word not in vocabulary: {0:?}")]
    NotInVocabulary(String),

    #[error("document {0:?} has no in-vocabulary tokens")]
    DegenerateDocument(String),

    #[error("zero vector has no direction")]
    ZeroVector,

    #[error("training diverged in epoch {epoch}: {detail}")]
    Diverged { epoch: usize, detail: String },

    #[error("perplexity search did not converge for row {row} (perplexity {achieved} vs target {target})")]
    Convergence { row: usize, achieved: f64, target: f64 },

    #[error("t-SNE produced non-finite coordinates at iteration {0}")]
    NonFiniteEmbedding(usize),

    #[error("model file error: {0}")]
    ModelFormat(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad input rather than a failed computation.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Io { .. }
                | Error::Parse { .. }
                | Error::Validation(_)
                | Error::Config(_)
                | Error::Dictionary(_)
                | Error::NotInVocabulary(_)
                | Error::ModelFormat(_)
        )
    }
}
