use serde::{Deserialize, Serialize};

use super::classify::{classify, ClassifyConfig, Verdict};
use crate::error::{Error, Result};
use crate::model::{coexistence_limits, dfb_sandwich_condition, HuntingRegime, ModelParams, ProblemVariant};
use crate::solver::Trajectory;
use crate::stationary::{coupled_bounds, CoupledBounds};

/// Default probe points, well behind the front.
pub const DEFAULT_PROBES: [f64; 2] = [1.0, 3.0];
/// Truncation length of the stationary band used for the Dirichlet problem.
pub const BAND_LENGTH: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum LimitPrediction {
    /// Constant limits `(u*, v*)`.
    Constant { u: f64, v: f64 },
    /// Membership in the stationary bound band.
    Band,
    /// No prediction for these parameters.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeCheck {
    pub x: f64,
    pub u: f64,
    pub v: f64,
    /// Accepted ranges, tolerance included.
    pub u_range: (f64, f64),
    pub v_range: (f64, f64),
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitReport {
    pub prediction: LimitPrediction,
    pub regime: HuntingRegime,
    pub t_final: f64,
    pub h_final: f64,
    /// `h(T) > max(probe) + 2`.
    pub horizon_sufficient: bool,
    pub tol: f64,
    pub probes: Vec<ProbeCheck>,
    /// `None` when there is no prediction or the horizon is too short.
    pub passed: Option<bool>,
}

/// Compare the final state at `probe_xs` with the predicted long-time
/// behaviour: constant limits for the Neumann problem (weakly or strongly
/// hunting), the stationary band for the Dirichlet problem when
/// `a (b + c) < 1`.
pub fn check_longtime_limits(
    trajectory: &Trajectory,
    params: &ModelParams,
    variant: ProblemVariant,
    probe_xs: &[f64],
    tol: f64,
) -> Result<LimitReport> {
    let outcome = classify(trajectory, params, variant, ClassifyConfig::default());
    if outcome.verdict != Verdict::Spreading {
        return Err(Error::NotSpreading(format!("verdict {:?}", outcome.verdict)));
    }
    let band = match variant {
        ProblemVariant::Dfb if dfb_sandwich_condition(params) => Some(coupled_bounds(params, BAND_LENGTH, 1e-6)?),
        _ => None,
    };
    Ok(check_with_band(trajectory, params, variant, probe_xs, tol, band.as_ref()))
}

/// As [`check_longtime_limits`] with a precomputed band; no classification.
pub fn check_with_band(
    trajectory: &Trajectory,
    params: &ModelParams,
    variant: ProblemVariant,
    probe_xs: &[f64],
    tol: f64,
    band: Option<&CoupledBounds>,
) -> LimitReport {
    let limits = coexistence_limits(params);
    let prediction = match variant {
        ProblemVariant::Nfb | ProblemVariant::Tfb => match limits.limits {
            Some((u, v)) => LimitPrediction::Constant { u, v },
            None => LimitPrediction::None,
        },
        ProblemVariant::Dfb => {
            if band.is_some() {
                LimitPrediction::Band
            } else {
                LimitPrediction::None
            }
        }
    };
    let state = &trajectory.final_state;
    let probe_max = probe_xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let horizon_sufficient = state.h > probe_max + 2.0;
    let probes: Vec<ProbeCheck> = probe_xs
        .iter()
        .map(|&x| {
            let (u, v) = state.sample(x);
            let (u_range, v_range) = match (prediction, band) {
                (LimitPrediction::Constant { u: us, v: vs }, _) => ((us - tol, us + tol), (vs - tol, vs + tol)),
                (LimitPrediction::Band, Some(b)) => {
                    let (ul, uh, vl, vh) = b.band_at(x);
                    ((ul - tol, uh + tol), (vl - tol, vh + tol))
                }
                _ => ((f64::NEG_INFINITY, f64::INFINITY), (f64::NEG_INFINITY, f64::INFINITY)),
            };
            let inside = |w: f64, (lo, hi): (f64, f64)| w >= lo && w <= hi;
            ProbeCheck {
                x,
                u,
                v,
                u_range,
                v_range,
                pass: inside(u, u_range) && inside(v, v_range),
            }
        })
        .collect();
    let passed = (prediction != LimitPrediction::None && horizon_sufficient).then(|| probes.iter().all(|p| p.pass));
    LimitReport {
        prediction,
        regime: limits.regime,
        t_final: state.t,
        h_final: state.h,
        horizon_sufficient,
        tol,
        probes,
        passed,
    }
}
