use thiserror::Error;

/// Errors raised across the library.
///
/// Numeric payloads are stored as `f64` regardless of the scalar type the
/// failing computation ran in.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("alpha must lie in (1,2), got {0}")]
    AlphaOutOfRange(f64),
    #[error("{name} out of range: {detail}")]
    OutOfRange { name: &'static str, detail: String },
    #[error("time must be positive, got {0}")]
    NonPositiveTime(f64),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("dimension {0} not supported by {1}")]
    UnsupportedDimension(usize, &'static str),
    #[error("quadrature failed: {0}")]
    Quadrature(String),
    #[error("condition {name} violated (margin {margin:.6e})")]
    ConditionViolated { name: &'static str, margin: f64 },
    #[error("Picard iteration failed to contract: ratios {ratios:?} at iteration {iteration}")]
    ContractionFailed { iteration: usize, ratios: Vec<f64> },
    #[error("maximum of {max_iter} iterations exceeded (last increment {last:.3e})")]
    MaxIterExceeded { max_iter: usize, last: f64 },
    #[error("sup-norm of the Zvonkin gradient {0:.4} is not below 1/2")]
    GradientTooLarge(f64),
    #[error("map is not contractive: gradient bound {0:.4} >= 1")]
    NotContractive(f64),
    #[error("state exploded at t = {0}")]
    Exploded(f64),
    #[error("Khasminskii constant c = {c:.4} >= 1; rescale f by at most {hint:.4}")]
    KhasminskiiConstant { c: f64, hint: f64 },
    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch { expected: Vec<usize>, found: Vec<usize> },
    #[error("field file format: {0}")]
    Format(String),
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
