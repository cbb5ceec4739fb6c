use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("point {point} lies outside the domain box of the defining function")]
    Domain { point: String },
    #[error("mixed Hessian is not Hermitian: imaginary residue {residue:e}")]
    InconsistentHessian { residue: f64 },
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("degenerate gradient |d rho| = {norm:e}")]
    DegenerateGradient { norm: f64 },
    #[error("quadric branch degenerates at |s| = {radius:.6} within the disc radius {scale:.6}; shrink the scale")]
    BranchDegeneracy { radius: f64, scale: f64 },
    #[error("disc does not reach the boundary along angle {theta:.6}; increase the scale")]
    DiscTooSmall { theta: f64 },
    #[error("tangential boundary crossing at {location} (derivative {derivative:e})")]
    Tangency { location: String, derivative: f64 },
    #[error("configuration error: {0}")]
    Configuration(String),
    #[error("schema error in field `{field}`: {message}")]
    Schema { field: String, message: String },
    #[error("frame construction failed: {0}")]
    Frame(String),
    #[error("surrogate fit failed: {0}")]
    Fit(String),
    #[error("collar violation: {0}")]
    CollarViolation(String),
    #[error("Riemann-Hilbert iteration did not converge after {iterations} iterations (last defect {last_defect:e})")]
    Nonconvergence {
        iterations: usize,
        last_defect: f64,
        history: Vec<f64>,
    },
    #[error("winding of the boundary angle drifted to {found} (expected {expected})")]
    Reindexing { expected: i64, found: i64 },
    #[error("divisor error: {0}")]
    Divisor(String),
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable name of the error class.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain { .. } => "domain",
            Error::InconsistentHessian { .. } => "inconsistent-hessian",
            Error::Argument(_) => "argument",
            Error::DegenerateGradient { .. } => "degenerate-gradient",
            Error::BranchDegeneracy { .. } => "branch-degeneracy",
            Error::DiscTooSmall { .. } => "disc-too-small",
            Error::Tangency { .. } => "tangency",
            Error::Configuration(_) => "configuration",
            Error::Schema { .. } => "schema",
            Error::Frame(_) => "frame",
            Error::Fit(_) => "fit",
            Error::CollarViolation(_) => "collar-violation",
            Error::Nonconvergence { .. } => "rh-nonconvergence",
            Error::Reindexing { .. } => "reindexing",
            Error::Divisor(_) => "divisor",
            Error::Io(_) => "io",
        }
    }

    pub(crate) fn schema(field: &str, message: impl Into<String>) -> Self {
        Error::Schema {
            field: field.to_string(),
            message: message.into(),
        }
    }
}

/// An [`Error`] tagged with the pipeline stage that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct StageError {
    pub stage: &'static str,
    pub error: Error,
}

impl StageError {
    pub fn new(stage: &'static str, error: Error) -> Self {
        StageError { stage, error }
    }
}

impl fmt::Display for StageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.stage, self.error)
    }
}

impl std::error::Error for StageError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

pub(crate) trait StageExt<T> {
    fn stage(self, stage: &'static str) -> std::result::Result<T, StageError>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &'static str) -> std::result::Result<T, StageError> {
        self.map_err(|e| StageError::new(stage, e))
    }
}
