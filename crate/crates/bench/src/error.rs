use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("{0}")]
    Usage(String),
    #[error("data format: {0}")]
    Data(String),
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] sparsefool::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, BenchError>;

impl BenchError {
    /// Process exit status: 1 usage, 2 data or model format, 3 numerical.
    pub fn exit_code(&self) -> i32 {
        use sparsefool::Error as E;
        match self {
            BenchError::Usage(_) => 1,
            BenchError::Data(_) | BenchError::File { .. } | BenchError::Json(_) | BenchError::Csv(_) => 2,
            BenchError::Io(_) => 2,
            BenchError::Core(e) => match e {
                E::InvalidParameter(_) | E::LabelOutOfRange { .. } => 1,
                E::ModelFormat(_) | E::ModelVersion(_) | E::Io(_) | E::EmptyData | E::ShapeMismatch { .. } => 2,
                E::InvalidBounds(_) => 2,
                _ => 3,
            },
        }
    }

    pub(crate) fn file(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        BenchError::File { path: path.into(), source }
    }
}
