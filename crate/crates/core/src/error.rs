use thiserror::Error;

pub type Result<T> = std::result::Result<T, QDiskError>;

#[derive(Debug, Error)]
pub enum QDiskError {
    #[error("deformation parameter q = {0} must satisfy 0 < q < 1")]
    QOutOfRange(String),

    #[error("q must be given as an exact rational such as \"1/2\", got {0:?}")]
    InexactRational(String),

    #[error("truncation dimension {dim} is below the minimum {min}")]
    DimensionTooSmall { dim: usize, min: usize },

    #[error("{what}: |{value}| = {modulus} must be < 1")]
    OutsideDisk {
        what: &'static str,
        value: String,
        modulus: f64,
    },

    #[error("q-derivative is undefined at y = 0")]
    ZeroArgument,

    #[error("no finite bound on sup|g| is available, cannot bound the Jackson tail")]
    TailBoundUnavailable,

    #[error("operands carry different deformation parameters ({left} vs {right})")]
    ContextMismatch { left: String, right: String },

    #[error("degree {degree} exceeds the per-variable cap {cap}")]
    DegreeCap { degree: u32, cap: u32 },

    #[error("polynomial degree {degree} is too large for truncation dimension {dim}")]
    DegreeTooLarge { degree: u32, dim: usize },

    #[error("interior margin {margin} is smaller than the required {required}")]
    MarginTooSmall { margin: usize, required: usize },

    #[error("dimension mismatch: {0}")]
    Shape(String),

    #[error("iteration did not converge after {iterations} steps (last estimate {last_estimate})")]
    NonConvergence {
        iterations: usize,
        last_estimate: f64,
    },

    #[error("boundary bandwidth {bandwidth} exceeds the limit {limit}")]
    Bandwidth { bandwidth: usize, limit: usize },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
