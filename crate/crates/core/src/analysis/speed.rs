use serde::{Deserialize, Serialize};

use super::classify::{classify, ClassifyConfig, Verdict};
use crate::error::{Error, Result};
use crate::model::{minimal_wave_speed, ModelParams, ProblemVariant};
use crate::solver::Trajectory;

/// Records needed in the fit window.
pub const MIN_WINDOW_RECORDS: usize = 10;
/// Relative slack on the speed bound.
pub const SPEED_MARGIN: f64 = 0.05;

/// Least-squares line through `(t, h)` samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn fit_line(t: &[f64], h: &[f64]) -> LinearFit {
    let n = t.len() as f64;
    let t_mean = t.iter().sum::<f64>() / n;
    let h_mean = h.iter().sum::<f64>() / n;
    let (mut stt, mut sth, mut shh) = (0.0, 0.0, 0.0);
    for (&ti, &hi) in t.iter().zip(h) {
        let (dt, dh) = (ti - t_mean, hi - h_mean);
        stt += dt * dt;
        sth += dt * dh;
        shh += dh * dh;
    }
    let slope = sth / stt;
    let r_squared = if shh == 0.0 { 1.0 } else { sth * sth / (stt * shh) };
    LinearFit {
        slope,
        intercept: h_mean - slope * t_mean,
        r_squared,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedEstimate {
    pub fit: LinearFit,
    pub window: (f64, f64),
    pub window_records: usize,
    /// `2 max{sqrt(cd), 1}`.
    pub bound: f64,
    /// `slope <= bound (1 + 0.05)`.
    pub satisfied: bool,
    /// `bound (1 + 0.05) - slope`.
    pub margin: f64,
}

impl SpeedEstimate {
    pub fn slope(&self) -> f64 {
        self.fit.slope
    }
}

/// Fit the right front over the late window `[alpha T, T]` and compare the
/// slope with the minimal wave speed.
pub fn estimate_speed(
    trajectory: &Trajectory,
    params: &ModelParams,
    variant: ProblemVariant,
    alpha: f64,
    classify_config: ClassifyConfig,
) -> Result<SpeedEstimate> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::param("alpha", format!("must lie in [0, 1), got {alpha}")));
    }
    let outcome = classify(trajectory, params, variant, classify_config);
    if outcome.verdict != Verdict::Spreading {
        return Err(Error::NotSpreading(format!(
            "verdict {:?} with h = {} at t = {}",
            outcome.verdict, outcome.evidence.h, outcome.evidence.t
        )));
    }
    let t_end = trajectory.last().t;
    let t_start = alpha * t_end;
    let window: Vec<_> = trajectory.records.iter().filter(|r| r.t >= t_start).collect();
    if window.len() < MIN_WINDOW_RECORDS {
        return Err(Error::WindowTooShort {
            found: window.len(),
            required: MIN_WINDOW_RECORDS,
        });
    }
    let t: Vec<f64> = window.iter().map(|r| r.t).collect();
    let h: Vec<f64> = window.iter().map(|r| r.h).collect();
    let fit = fit_line(&t, &h);
    let bound = minimal_wave_speed(params);
    let limit = bound * (1.0 + SPEED_MARGIN);
    Ok(SpeedEstimate {
        fit,
        window: (t_start, t_end),
        window_records: window.len(),
        bound,
        satisfied: fit.slope <= limit,
        margin: limit - fit.slope,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identity_line() {
        let t: Vec<f64> = (0..50).map(|i| i as f64 * 0.3).collect();
        let fit = fit_line(&t, &t);
        assert_abs_diff_eq!(fit.slope, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(fit.intercept, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.r_squared, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn noisy_line_has_lower_r2() {
        let t: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let h: Vec<f64> = t.iter().enumerate().map(|(i, x)| 2.0 * x + if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let fit = fit_line(&t, &h);
        assert!((fit.slope - 2.0).abs() < 0.05);
        assert!(fit.r_squared < 1.0 && fit.r_squared > 0.9);
    }
}
