use thiserror::Error;

/// Errors raised by the analysis routines.
///
/// The variants mirror the failure kinds reported by the command-line front
/// end, so `kind()` is stable and safe to serialize.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("point outside the admissible domain: {0}")]
    Domain(String),
    #[error("quadrature did not reach tolerance: estimate {estimate:.3e} > requested {requested:.3e}")]
    Quadrature { estimate: f64, requested: f64 },
    #[error("degenerate quantity: {0}")]
    Degenerate(String),
    #[error("iteration did not converge: {0}")]
    Convergence(String),
    #[error("nothing found: {0}")]
    NotFound(String),
    #[error("geometry violation: {0}")]
    Geometry(String),
    #[error("tunnel length {length} is not an integer multiple of width {width}")]
    NonIntegralChop { length: f64, width: f64 },
    #[error("resolution rejected: {0}")]
    Resolution(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("pipeline stage `{stage}` failed: {reason}")]
    Pipeline { stage: String, reason: String },
    #[error("recursion exceeded {cap} rounds")]
    RoundCapExceeded { cap: usize },
    #[error("unsupported dimension {0}")]
    Dimension(usize),
    #[error("invalid input: {0}")]
    Parse(String),
    #[error("io: {0}")]
    Io(String),
}

impl LabError {
    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            LabError::Domain(_) => "DomainError",
            LabError::Quadrature { .. } => "QuadratureError",
            LabError::Degenerate(_) => "DegenerateError",
            LabError::Convergence(_) => "ConvergenceError",
            LabError::NotFound(_) => "NotFound",
            LabError::Geometry(_) => "GeometryError",
            LabError::NonIntegralChop { .. } => "NonIntegralChop",
            LabError::Resolution(_) => "ResolutionError",
            LabError::Precondition(_) => "PreconditionError",
            LabError::Pipeline { .. } => "PipelineError",
            LabError::RoundCapExceeded { .. } => "RoundCapExceeded",
            LabError::Dimension(_) => "DimensionError",
            LabError::Parse(_) => "ParseError",
            LabError::Io(_) => "IoError",
        }
    }

    /// Errors that mean "the analysis ran but found nothing", as opposed to
    /// bad input.
    pub fn is_not_found(&self) -> bool {
        matches!(
            self,
            LabError::NotFound(_) | LabError::Pipeline { .. } | LabError::RoundCapExceeded { .. }
        )
    }
}

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for LabError {
    fn from(e: serde_json::Error) -> Self {
        LabError::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
