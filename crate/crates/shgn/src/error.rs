use thiserror::Error;

/// Errors surfaced by corpus loaders, graph construction, the numeric
/// substrate, and the training harness.
#[derive(Error, Debug)]
pub enum ShgnError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("shape mismatch in {op}: {detail}")]
    Shape { op: String, detail: String },
    #[error("unknown node id: {0}")]
    UnknownNode(String),
    #[error("non-finite value encountered in {0}")]
    NonFinite(String),
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
}

impl ShgnError {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        ShgnError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<String>, line: usize, msg: impl Into<String>) -> Self {
        ShgnError::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }

    pub fn shape(op: impl Into<String>, detail: impl Into<String>) -> Self {
        ShgnError::Shape {
            op: op.into(),
            detail: detail.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, ShgnError>;
