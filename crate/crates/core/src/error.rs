use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch { expected: Vec<usize>, found: Vec<usize> },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("every index is excluded")]
    AllExcluded,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("label {label} out of range for {num_classes} classes")]
    LabelOutOfRange { label: usize, num_classes: usize },

    #[error("normal vector is identically zero")]
    ZeroNormal,

    #[error("degenerate classifier: every candidate class has a zero gradient difference")]
    DegenerateClassifier,

    #[error("invalid box bounds: lower exceeds upper at coordinate {0}")]
    InvalidBounds(usize),

    #[error("empty training data")]
    EmptyData,

    #[error("training diverged: loss became non-finite at epoch {epoch}")]
    Diverged { epoch: usize },

    #[error("malformed model file: {0}")]
    ModelFormat(String),

    #[error("unsupported model file version {0:?}")]
    ModelVersion(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
