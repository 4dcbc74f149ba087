use serde::{Deserialize, Serialize};

use super::{init_state, FrontFixedState, ProblemSpec, Stepper, TimeStep};
use crate::error::{Error, Result};
use crate::model::{solution_bounds, ProblemVariant};

/// Per-step summary of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub t: f64,
    pub g: f64,
    pub h: f64,
    pub sup_u: f64,
    pub sup_v: f64,
    /// `u_x(t, h(t))`.
    pub ux_h: f64,
    /// `v_x(t, h(t))`.
    pub vx_h: f64,
    /// Stefan speed of the right front at this state.
    pub hprime: f64,
    /// Left-front gradients and speed; zero unless both fronts are free.
    pub ux_g: f64,
    pub vx_g: f64,
    pub gprime: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Termination {
    HorizonReached,
    ClassifiedEarly,
    StepFailure { t: f64, reason: String },
}

/// Observer verdict after each record.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub records: Vec<Record>,
    /// Initial state plus one state per snapshot time.
    pub snapshots: Vec<FrontFixedState>,
    pub final_state: FrontFixedState,
    pub termination: Termination,
    /// Accepted steps.
    pub steps: usize,
    pub clamp_count: u64,
    /// Failed attempts that were retried with a halved step.
    pub dt_halvings: u64,
    /// Runtime invariant violations (positivity, bounds, front monotonicity),
    /// at most [`MAX_REPORTED_VIOLATIONS`] of them.
    pub invariant_violations: Vec<String>,
    pub violation_count: usize,
}

pub const MAX_REPORTED_VIOLATIONS: usize = 100;

impl Trajectory {
    pub fn last(&self) -> &Record {
        self.records.last().expect("trajectory always holds the initial record")
    }

    pub fn failed(&self) -> bool {
        matches!(self.termination, Termination::StepFailure { .. })
    }

    /// `h` at time `t` by linear interpolation between records (clamped).
    pub fn h_at(&self, t: f64) -> f64 {
        interpolate_records(&self.records, t, |r| r.h)
    }

    /// `g` at time `t`, as [`Trajectory::h_at`].
    pub fn g_at(&self, t: f64) -> f64 {
        interpolate_records(&self.records, t, |r| r.g)
    }
}

fn interpolate_records(records: &[Record], t: f64, field: impl Fn(&Record) -> f64) -> f64 {
    let first = &records[0];
    if t <= first.t {
        return field(first);
    }
    let k = records.partition_point(|r| r.t < t);
    if k >= records.len() {
        return field(records.last().unwrap());
    }
    let (r0, r1) = (&records[k - 1], &records[k]);
    let s = (t - r0.t) / (r1.t - r0.t);
    field(r0) + s * (field(r1) - field(r0))
}

/// Run `spec` to its horizon.
pub fn run(spec: &ProblemSpec) -> Result<Trajectory> {
    run_with(spec, |_| Control::Continue)
}

/// Run `spec`, letting `observer` stop the run after any record.
///
/// Only an invalid spec is an error; a step failure ends the run with
/// [`Termination::StepFailure`] and the data gathered so far.
pub fn run_with<F>(spec: &ProblemSpec, mut observer: F) -> Result<Trajectory>
where
    F: FnMut(&Record) -> Control,
{
    let mut state = init_state(spec)?;
    let mut stepper = Stepper::new(spec);
    let mut checker = InvariantChecker::new(spec);
    let t_max = spec.numerics.t_max;
    let max_halvings = match spec.numerics.dt {
        TimeStep::Auto => spec.numerics.max_halvings,
        TimeStep::Fixed(_) => 0,
    };

    let mut record = make_record(&stepper, &state);
    checker.check_state(&state, &record);
    let mut traj = Trajectory {
        records: vec![record],
        snapshots: vec![state.clone()],
        final_state: state.clone(),
        termination: Termination::HorizonReached,
        steps: 0,
        clamp_count: 0,
        dt_halvings: 0,
        invariant_violations: Vec::new(),
        violation_count: 0,
    };
    let mut next_snapshot = spec.numerics.snapshot_every.map(|every| (1usize, every));
    let mut stopped = observer(&record) == Control::Stop;

    while !stopped && state.t < t_max {
        let stop_at = match next_snapshot {
            Some((k, every)) => (k as f64 * every).min(t_max),
            None => t_max,
        };
        let speeds = stepper.speeds(&state);
        let base = match spec.numerics.dt {
            TimeStep::Auto => stepper.auto_dt(&state, &speeds),
            TimeStep::Fixed(dt) => dt,
        };
        let mut attempt = 0;
        let landed = loop {
            let mut dt = base * 0.5f64.powi(attempt as i32);
            let remaining = stop_at - state.t;
            let lands = dt >= remaining * (1.0 - 1e-12);
            if lands {
                dt = remaining;
            }
            match stepper.step(&mut state, dt) {
                Ok(_) => break Ok(lands),
                Err(Error::StepFailure { t, reason }) => {
                    if attempt < max_halvings {
                        attempt += 1;
                        traj.dt_halvings += 1;
                        log::debug!("step failed at t = {t} ({reason}); halving dt");
                    } else {
                        break Err(Termination::StepFailure { t, reason });
                    }
                }
                Err(other) => break Err(Termination::StepFailure {
                    t: state.t,
                    reason: other.to_string(),
                }),
            }
        };
        let lands = match landed {
            Ok(lands) => lands,
            Err(termination) => {
                traj.termination = termination;
                break;
            }
        };
        if lands {
            state.t = stop_at;
        }
        traj.steps += 1;
        let previous = record;
        record = make_record(&stepper, &state);
        checker.check_state(&state, &record);
        checker.check_fronts(&previous, &record);
        traj.records.push(record);
        if let Some((k, every)) = next_snapshot {
            if lands && stop_at == (k as f64 * every).min(t_max) {
                traj.snapshots.push(state.clone());
                next_snapshot = Some((k + 1, every));
            }
        }
        if observer(&record) == Control::Stop {
            stopped = true;
            traj.termination = Termination::ClassifiedEarly;
        }
    }

    traj.clamp_count = stepper.clamp_count();
    traj.invariant_violations = checker.violations;
    traj.violation_count = checker.count;
    traj.final_state = state;
    Ok(traj)
}

fn make_record(stepper: &Stepper, state: &FrontFixedState) -> Record {
    let speeds = stepper.speeds(state);
    let left = speeds.fluxes.left.unwrap_or_default();
    Record {
        t: state.t,
        g: state.g,
        h: state.h,
        sup_u: state.sup_u(),
        sup_v: state.sup_v(),
        ux_h: speeds.fluxes.right.u,
        vx_h: speeds.fluxes.right.v,
        hprime: speeds.hprime,
        ux_g: left.u,
        vx_g: left.v,
        gprime: speeds.gprime,
    }
}

/// Positivity, a priori bounds and front monotonicity.
struct InvariantChecker {
    m_u: f64,
    m_v: f64,
    frozen: bool,
    two_fronts: bool,
    violations: Vec<String>,
    count: usize,
}

/// Below this total mass the fronts are allowed to stall in floating point.
const STALL_MASS: f64 = 1e-100;

impl InvariantChecker {
    fn new(spec: &ProblemSpec) -> Self {
        let (m_u, m_v) = solution_bounds(&spec.params, &spec.initial, spec.variant);
        Self {
            m_u,
            m_v,
            frozen: spec.hooks.freeze_fronts,
            two_fronts: spec.variant == ProblemVariant::Tfb,
            violations: Vec::new(),
            count: 0,
        }
    }

    fn flag(&mut self, message: String) {
        self.count += 1;
        if self.violations.len() < MAX_REPORTED_VIOLATIONS {
            self.violations.push(message);
        }
    }

    fn check_state(&mut self, state: &FrontFixedState, record: &Record) {
        let t = state.t;
        if state.u.iter().chain(&state.v).any(|&x| !(x >= 0.0)) {
            self.flag(format!("t = {t}: negative or non-finite value"));
        }
        if record.sup_u > self.m_u + 1e-6 * (1.0 + self.m_u) {
            self.flag(format!("t = {t}: sup u = {} exceeds bound {}", record.sup_u, self.m_u));
        }
        if record.sup_v > self.m_v + 1e-6 * (1.0 + self.m_v) {
            self.flag(format!("t = {t}: sup v = {} exceeds bound {}", record.sup_v, self.m_v));
        }
        if !(state.h > state.g) {
            self.flag(format!("t = {t}: fronts crossed (g = {}, h = {})", state.g, state.h));
        }
    }

    fn check_fronts(&mut self, prev: &Record, next: &Record) {
        let t = next.t;
        let mass = prev.sup_u + prev.sup_v;
        let may_stall = self.frozen || mass < STALL_MASS;
        if next.h < prev.h || (next.h == prev.h && !may_stall && prev.hprime * (t - prev.t) > f64::EPSILON * prev.h) {
            self.flag(format!("t = {t}: h did not increase ({} -> {})", prev.h, next.h));
        }
        if self.two_fronts
            && (next.g > prev.g
                || (next.g == prev.g && !may_stall && -prev.gprime * (t - prev.t) > f64::EPSILON * prev.g.abs()))
        {
            self.flag(format!("t = {t}: g did not decrease ({} -> {})", prev.g, next.g));
        }
        if !self.frozen && !(prev.hprime > 0.0) && mass >= STALL_MASS {
            self.flag(format!("t = {}: h' = {} is not positive", prev.t, prev.hprime));
        }
    }
}
