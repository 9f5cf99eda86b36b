use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: malformed record: {message}")]
    MalformedLine { line: usize, message: String },

    #[error("record {id:?}: {message}")]
    InvalidRecord { id: String, message: String },

    #[error("corpus is empty after filtering ({dropped} documents dropped)")]
    EmptyCorpus { dropped: usize },

    #[error("{kind} index {index} out of range (size {size})")]
    OutOfRange {
        kind: &'static str,
        index: usize,
        size: usize,
    },

    #[error("count underflow in {table} at {cell}")]
    Underflow { table: &'static str, cell: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid configuration: field `{field}`: {message}")]
    Config { field: &'static str, message: String },

    #[error("unknown author {0:?} in held-out data")]
    UnknownAuthor(String),

    #[error("no evaluable tokens: all {skipped} tokens are out of vocabulary")]
    NoEvaluableTokens { skipped: usize },

    #[error("oracle refused: {0}")]
    OracleLimit(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
