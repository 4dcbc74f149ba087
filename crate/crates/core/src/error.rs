use thiserror::Error;

use crate::analysis::Probe;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("initial data rejected: {}", .0.join("; "))]
    InvalidInitialData(Vec<String>),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("length {length} does not exceed the solvability threshold pi*sqrt(d/f0) = {threshold}")]
    BelowSolvabilityThreshold { length: f64, threshold: f64 },

    #[error("monotone iteration stalled after {iterations} iterations (last difference {last_difference:e})")]
    IterationStalled {
        iterations: usize,
        last_difference: f64,
    },

    #[error("truncated profiles did not settle after {doublings} doublings (last discrepancy {discrepancy:e})")]
    TruncationNotConverged { doublings: usize, discrepancy: f64 },

    #[error("step failure at t = {t}: {reason}")]
    StepFailure { t: f64, reason: String },

    #[error("seed expansion failed: {0}")]
    SeedExpansion(String),

    #[error("non-monotone verdict pattern across {} probes", .0.len())]
    NonMonotoneProbes(Vec<Probe>),

    #[error("not spreading: {0}")]
    NotSpreading(String),

    #[error("fit window holds {found} records, at least {required} required")]
    WindowTooShort { found: usize, required: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
