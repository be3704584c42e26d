use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid shape: {0}")]
    InvalidShape(String),

    #[error("grid has {cells} cells, more than the limit of {limit}")]
    ShapeTooLarge { cells: u128, limit: u64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("cell {0} lies outside the grid")]
    CellOutOfRange(String),

    #[error("invalid cube: {0}")]
    InvalidCube(String),

    #[error("axis {axis} is not free in cube {cube}")]
    AxisNotFree { axis: usize, cube: String },

    #[error("threshold r = {0} is not supported here (only r = 2)")]
    UnsupportedThreshold(u32),

    #[error("the set does not internally span {0}")]
    NotSpanning(String),

    #[error("series has no sign change on ({lo}, {hi})")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("outside the small-p regime: {0}")]
    OutOfRegime(String),

    #[error("enumeration guard exceeded: {0}")]
    GuardExceeded(String),

    #[error("missing value: {0}")]
    MissingValue(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
