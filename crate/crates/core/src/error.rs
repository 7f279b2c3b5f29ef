use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("unsupported bit depth: {0}")]
    UnsupportedBitDepth(String),
    #[error("unsupported color type: {0}")]
    UnsupportedColorType(String),
    #[error("truncated image data: {0}")]
    Truncated(String),
    #[error("malformed image: {0}")]
    Malformed(String),
    #[error("unrecognized image format for {0}")]
    UnknownFormat(PathBuf),
    #[error("pixel buffer holds {actual} pixels, expected {expected}")]
    PixelCount { expected: usize, actual: usize },
    #[error("image dimensions differ: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("requested {k} colors but the data holds only {available} distinct points")]
    TooManyClusters { k: usize, available: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid token {token:?} for {what}")]
    InvalidToken { what: &'static str, token: String },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
