use serde::{Deserialize, Serialize};

use crate::model::{lambda_threshold, ModelParams, ProblemVariant};
use crate::solver::{Control, Record, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Spreading,
    Vanishing,
    Undetermined,
}

/// Tolerances of the vanishing signature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyConfig {
    /// Bound on `sup u + sup v`.
    pub eps_mass: f64,
    /// Bound on the front speed.
    pub eps_front: f64,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        Self {
            eps_mass: 1e-4,
            eps_front: 1e-5,
        }
    }
}

/// State of the run at the record that decided the verdict (the last record
/// when undetermined).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub t: f64,
    pub g: f64,
    pub h: f64,
    pub hprime: f64,
    pub gprime: f64,
    pub sup_u: f64,
    pub sup_v: f64,
}

impl From<&Record> for Evidence {
    fn from(r: &Record) -> Self {
        Self {
            t: r.t,
            g: r.g,
            h: r.h,
            hprime: r.hprime,
            gprime: r.gprime,
            sup_u: r.sup_u,
            sup_v: r.sup_v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub verdict: Verdict,
    pub evidence: Evidence,
    /// Threshold length compared against `h` (against the half-width for
    /// two fronts).
    pub lambda: f64,
    pub lambda_heuristic: bool,
    pub thresholds: ClassifyConfig,
}

/// Record-by-record classifier, usable as an early-stop observer.
#[derive(Debug, Clone, Copy)]
pub struct Classifier {
    variant: ProblemVariant,
    lambda: f64,
    heuristic: bool,
    config: ClassifyConfig,
}

impl Classifier {
    pub fn new(params: &ModelParams, variant: ProblemVariant, config: ClassifyConfig) -> Self {
        let threshold = lambda_threshold(params, variant);
        Self {
            variant,
            lambda: threshold.value,
            heuristic: threshold.heuristic,
            config,
        }
    }

    /// Habitat extent compared against the threshold.
    fn extent(&self, r: &Record) -> f64 {
        match self.variant {
            ProblemVariant::Tfb => 0.5 * (r.h - r.g),
            _ => r.h,
        }
    }

    /// Verdict implied by a single record, if any.
    pub fn judge(&self, r: &Record) -> Verdict {
        let extent = self.extent(r);
        if extent >= self.lambda {
            return Verdict::Spreading;
        }
        let speed = r.hprime.max(-r.gprime);
        if r.sup_u + r.sup_v < self.config.eps_mass && speed < self.config.eps_front {
            return Verdict::Vanishing;
        }
        Verdict::Undetermined
    }

    pub fn outcome(&self, verdict: Verdict, r: &Record) -> Outcome {
        Outcome {
            verdict,
            evidence: r.into(),
            lambda: self.lambda,
            lambda_heuristic: self.heuristic,
            thresholds: self.config,
        }
    }

    /// Observer stopping a run at the first decisive record.
    pub fn observer(self) -> impl FnMut(&Record) -> Control {
        move |r| match self.judge(r) {
            Verdict::Undetermined => Control::Continue,
            _ => Control::Stop,
        }
    }

    pub fn classify(&self, trajectory: &Trajectory) -> Outcome {
        for r in &trajectory.records {
            let verdict = self.judge(r);
            if verdict != Verdict::Undetermined {
                return self.outcome(verdict, r);
            }
        }
        self.outcome(Verdict::Undetermined, trajectory.last())
    }
}

/// Spreading once the front passes the threshold length, Vanishing once
/// mass and front speed fall below the tolerances, otherwise Undetermined.
pub fn classify(
    trajectory: &Trajectory,
    params: &ModelParams,
    variant: ProblemVariant,
    config: ClassifyConfig,
) -> Outcome {
    Classifier::new(params, variant, config).classify(trajectory)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{FrontFixedState, Termination};

    fn record(t: f64, h: f64, mass: f64, hprime: f64) -> Record {
        Record {
            t,
            g: 0.0,
            h,
            sup_u: mass / 2.0,
            sup_v: mass / 2.0,
            ux_h: 0.0,
            vx_h: 0.0,
            hprime,
            ux_g: 0.0,
            vx_g: 0.0,
            gprime: 0.0,
        }
    }

    fn trajectory(records: Vec<Record>) -> Trajectory {
        let state = FrontFixedState {
            t: 0.0,
            g: 0.0,
            h: 1.0,
            u: vec![0.0; 3],
            v: vec![0.0; 3],
        };
        Trajectory {
            records,
            snapshots: vec![],
            final_state: state,
            termination: Termination::HorizonReached,
            steps: 0,
            clamp_count: 0,
            dt_halvings: 0,
            invariant_violations: vec![],
            violation_count: 0,
        }
    }

    fn params() -> ModelParams {
        ModelParams::new(0.5, 0.5, 1.0, 1.0).unwrap()
    }

    #[test]
    fn first_crossing_is_reported() {
        let traj = trajectory(vec![
            record(0.0, 1.0, 2.0, 1.0),
            record(1.0, 3.0, 2.0, 1.0),
            record(2.0, 3.2, 2.0, 1.0),
            record(3.0, 4.0, 2.0, 1.0),
        ]);
        let out = classify(&traj, &params(), ProblemVariant::Dfb, ClassifyConfig::default());
        assert_eq!(out.verdict, Verdict::Spreading);
        assert_eq!(out.evidence.t, 2.0);
        assert!(out.evidence.h >= out.lambda);
    }

    #[test]
    fn vanishing_needs_both_mass_and_speed() {
        let slow_heavy = trajectory(vec![record(0.0, 1.0, 1.0, 0.0), record(1.0, 1.0, 1e-3, 0.0)]);
        let light_fast = trajectory(vec![record(0.0, 1.0, 1.0, 0.0), record(1.0, 1.0, 1e-6, 1e-3)]);
        let gone = trajectory(vec![record(0.0, 1.0, 1.0, 0.0), record(1.0, 1.0, 1e-6, 1e-7)]);
        let c = Classifier::new(&params(), ProblemVariant::Dfb, ClassifyConfig::default());
        assert_eq!(c.classify(&slow_heavy).verdict, Verdict::Undetermined);
        assert_eq!(c.classify(&light_fast).verdict, Verdict::Undetermined);
        assert_eq!(c.classify(&gone).verdict, Verdict::Vanishing);
    }

    #[test]
    fn two_fronts_use_half_width() {
        let nfb_lambda = lambda_threshold(&params(), ProblemVariant::Nfb).value;
        let mut r = record(0.0, 1.2 * nfb_lambda, 1.0, 1.0);
        r.g = -0.7 * nfb_lambda;
        let c = Classifier::new(&params(), ProblemVariant::Tfb, ClassifyConfig::default());
        assert_eq!(c.judge(&r), Verdict::Undetermined);
        r.g = -0.9 * nfb_lambda;
        assert_eq!(c.judge(&r), Verdict::Spreading);
    }

    #[test]
    fn deterministic() {
        let traj = trajectory(vec![record(0.0, 1.0, 1.0, 0.1), record(1.0, 1.5, 1.0, 0.1)]);
        let a = classify(&traj, &params(), ProblemVariant::Nfb, ClassifyConfig::default());
        let b = classify(&traj, &params(), ProblemVariant::Nfb, ClassifyConfig::default());
        assert_eq!(a, b);
    }
}
