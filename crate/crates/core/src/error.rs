use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid dimension {0}: must lie in 1..=64")]
    InvalidDimension(usize),

    #[error("non-finite value at index {0}")]
    NonFinite(usize),

    #[error("singular matrix: pivot {pivot} has magnitude {magnitude:e} below threshold {threshold:e}")]
    Singular {
        pivot: usize,
        magnitude: f64,
        threshold: f64,
    },

    #[error("{what} did not converge after {iterations} iterations (last estimate {last:e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        last: f64,
    },

    #[error("root finder did not converge after {sweeps} sweeps; residuals {residuals:?}")]
    RootsNoConvergence { sweeps: usize, residuals: Vec<f64> },

    #[error("Neumann series diverges: last term norms {last_terms:?} are non-decreasing")]
    Divergent { last_terms: Vec<f64> },

    #[error("trajectory blew up at index {index} (norm {norm:e})")]
    UnboundedTrajectory { index: usize, norm: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    /// Short machine-readable category name.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::InvalidDimension(_) => "invalid_dimension",
            Error::NonFinite(_) => "non_finite",
            Error::Singular { .. } => "singular",
            Error::NoConvergence { .. } => "no_convergence",
            Error::RootsNoConvergence { .. } => "roots_no_convergence",
            Error::Divergent { .. } => "divergent",
            Error::UnboundedTrajectory { .. } => "unbounded_trajectory",
            Error::Precondition(_) => "precondition",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
        }
    }

    /// True for failures of an iterative or numerical procedure, as opposed
    /// to malformed input or violated preconditions.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Singular { .. }
                | Error::NoConvergence { .. }
                | Error::RootsNoConvergence { .. }
                | Error::Divergent { .. }
                | Error::UnboundedTrajectory { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
