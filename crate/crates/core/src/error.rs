use num_complex::Complex64;
use thiserror::Error;

use crate::eigen::Eigenpair;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter `{param}`: {reason}")]
    Validation { param: String, reason: String },

    #[error("singular input: {0}")]
    Singular(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("integral diverges: {0}")]
    Divergence(String),

    #[error("integrator step size underflow at x = {x}")]
    StepUnderflow { x: f64 },

    #[error("function vanishes on the contour near {at}")]
    BoundaryZero { at: Complex64 },

    #[error("winding number {winding} is not close to an integer")]
    NonIntegerWinding { winding: f64 },

    #[error("contour needs more than {limit} samples")]
    SampleBudget { limit: usize },

    #[error("subdivision exceeded {boxes} boxes ({} eigenvalues located so far)", partial.len())]
    BudgetExceeded { boxes: usize, partial: Vec<Eigenpair> },

    #[error("condition violated: {0}")]
    ConditionViolated(String),

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn validation(param: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation { param: param.into(), reason: reason.into() }
    }

    /// Short machine-readable tag used in the CLI error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Validation { .. } => "validation",
            Error::Singular(_) => "singular",
            Error::Precondition(_) => "precondition",
            Error::Divergence(_) => "divergence",
            Error::StepUnderflow { .. } => "step_underflow",
            Error::BoundaryZero { .. } => "boundary_zero",
            Error::NonIntegerWinding { .. } => "non_integer_winding",
            Error::SampleBudget { .. } => "sample_budget",
            Error::BudgetExceeded { .. } => "budget_exceeded",
            Error::ConditionViolated(_) => "condition_violated",
            Error::Overflow(_) => "overflow",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}
