use thiserror::Error;

#[derive(Error, Debug)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("mesh ratio tau/h^2 = {ratio:.6} violates the bound {bound:.6}")]
    MeshRatio { ratio: f64, bound: f64 },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("kernel cone is clipped by the table extent; rebuild with a larger extent or acknowledge clipping")]
    ClippedKernel,
    #[error("march became non-finite at time level {level}")]
    Instability { level: usize },
    #[error("singular normal equations (rank defect near column {column})")]
    Singular { column: usize },
    #[error("problem too large for the dense path: {unknowns} unknowns (limit {limit})")]
    TooLarge { unknowns: usize, limit: usize },
    #[error("need at least {needed} usable rows, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
