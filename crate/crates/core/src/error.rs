use std::path::PathBuf;

/// Errors raised across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the domain an operation is defined on.
    #[error("domain error: {0}")]
    Domain(String),

    /// Array shapes or dimensions do not line up.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// The requested configuration has no implementation (e.g. closed-form
    /// bridges under a non-zero reference drift).
    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    /// Invalid configuration or construction parameters.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A value became NaN or infinite.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// Training diverged.
    #[error("training diverged: {0}")]
    Divergence(String),

    #[error("invalid data in {path}: {msg}")]
    Data { path: PathBuf, msg: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn data(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        Error::Data {
            path: path.into(),
            msg: msg.into(),
        }
    }
}
