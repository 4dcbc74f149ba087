//! Verdicts drawn from trajectories: classification, critical-coefficient
//! bisection, spreading speed, long-time limits and front comparisons.

mod bisect;
mod classify;
mod comparison;
mod limits;
mod speed;

pub use bisect::{bisect_mu_star, check_monotone, probe, sweep_mu, BisectConfig, MuStarEstimate, Probe, ProbeConfig};
pub use classify::{classify, ClassifyConfig, Classifier, Evidence, Outcome, Verdict};
pub use comparison::{
    comparison_harness, front_ordering, ComparisonConfig, ComparisonReport, FinalFronts, OrderingCheck,
    OrderingViolation,
};
pub use limits::{
    check_longtime_limits, check_with_band, LimitPrediction, LimitReport, ProbeCheck, BAND_LENGTH, DEFAULT_PROBES,
};
pub use speed::{estimate_speed, fit_line, LinearFit, SpeedEstimate, MIN_WINDOW_RECORDS, SPEED_MARGIN};
