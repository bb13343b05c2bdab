use thiserror::Error;

/// Errors produced by the geometry engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("operation requires a nonempty mask")]
    EmptyMask,

    #[error("invalid box: {0}")]
    InvalidBox(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("format error: {0}")]
    Format(String),

    #[error("index {index} out of range for length {len}")]
    Index { index: usize, len: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("io error: {0}")]
    Io(String),

    #[error("{path}: {cause}")]
    InFile { path: String, cause: Box<Error> },
}

impl Error {
    pub fn in_file(self, path: impl AsRef<std::path::Path>) -> Self {
        Error::InFile { path: path.as_ref().display().to_string(), cause: Box::new(self) }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
