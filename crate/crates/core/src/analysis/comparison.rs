use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ProblemVariant;
use crate::parallel::{self, Execution};
use crate::solver::{run, ProblemSpec, Termination, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderingViolation {
    pub t: f64,
    pub lower: f64,
    pub upper: f64,
    pub tolerance: f64,
}

/// Outcome of checking `lower(t) <= upper(t) + tolerance` at a set of times.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderingCheck {
    pub holds: bool,
    pub times_checked: usize,
    /// Largest `lower - upper` seen (negative when strictly ordered).
    pub max_excess: f64,
    pub first_violation: Option<OrderingViolation>,
}

/// Check `h_lower(t) <= h_upper(t) + tol_cells * dx(t)` at every record
/// time of `reference` covered by both runs, where `dx(t)` is the grid
/// spacing of `reference` and fronts are interpolated linearly in time.
pub fn front_ordering(lower: &Trajectory, upper: &Trajectory, reference: &Trajectory, tol_cells: f64) -> OrderingCheck {
    let t_end = lower.last().t.min(upper.last().t);
    let n = reference.final_state.n_cells() as f64;
    let mut check = OrderingCheck {
        holds: true,
        times_checked: 0,
        max_excess: f64::NEG_INFINITY,
        first_violation: None,
    };
    for r in reference.records.iter().take_while(|r| r.t <= t_end) {
        let lo = lower.h_at(r.t);
        let hi = upper.h_at(r.t);
        let tolerance = tol_cells * (r.h - r.g) / n;
        check.times_checked += 1;
        check.max_excess = check.max_excess.max(lo - hi);
        if lo > hi + tolerance && check.first_violation.is_none() {
            check.holds = false;
            check.first_violation = Some(OrderingViolation {
                t: r.t,
                lower: lo,
                upper: hi,
                tolerance,
            });
        }
    }
    check
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonConfig {
    /// Tolerance in grid cells of the coupled run.
    pub tol_cells: f64,
    pub execution: Execution,
}

impl Default for ComparisonConfig {
    fn default() -> Self {
        Self {
            tol_cells: 2.0,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FinalFronts {
    pub lower: f64,
    pub coupled: f64,
    pub upper: f64,
    pub scalar_prey: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    /// Predator alone (`u0 = 0`), front coefficient `mu rho`, below the
    /// coupled front.
    pub lower: OrderingCheck,
    /// Coupled front below the system without predation pressure on the
    /// prey (`a = 0`), which is an upper solution of the full system.
    pub upper: OrderingCheck,
    /// Coupled front against the prey-only problem (`v0 = 0`, front
    /// coefficient `mu`). This bound ignores the predator's contribution to
    /// the front speed, so it is reported but not required.
    pub scalar_prey_upper: OrderingCheck,
    pub final_fronts: FinalFronts,
    /// Step failures in any member run.
    pub failures: Vec<String>,
    /// Runtime invariant violations summed over the member runs.
    pub invariant_violations: usize,
    pub passed: bool,
}

/// Run the coupled problem together with its comparison problems and check
/// the ordering of the fronts at every coupled record.
pub fn comparison_harness(spec: &ProblemSpec, config: &ComparisonConfig) -> Result<ComparisonReport> {
    if spec.variant == ProblemVariant::Tfb {
        return Err(Error::Precondition("the comparison harness needs a one-front problem".into()));
    }
    spec.validate()?;

    let mut lower = spec.clone();
    lower.initial.u0 = spec.initial.u0.scaled(0.0);
    lower.hooks.skip_validation = true;

    let mut upper = spec.clone();
    upper.hooks.no_predation = true;

    let mut prey_only = spec.clone();
    prey_only.initial.v0 = spec.initial.v0.scaled(0.0);
    prey_only.hooks.skip_validation = true;

    let specs = [spec.clone(), lower, upper, prey_only];
    let runs = parallel::map(config.execution, &specs, run);
    let mut trajectories = Vec::with_capacity(4);
    for r in runs {
        trajectories.push(r?);
    }
    let names = ["coupled", "lower", "upper", "prey-only"];
    let failures: Vec<String> = trajectories
        .iter()
        .zip(names)
        .filter_map(|(t, name)| match &t.termination {
            Termination::StepFailure { t, reason } => Some(format!("{name} run failed at t = {t}: {reason}")),
            _ => None,
        })
        .collect();
    let invariant_violations = trajectories.iter().map(|t| t.violation_count).sum();
    let [coupled, lower, upper, prey_only]: [Trajectory; 4] = trajectories.try_into().unwrap();

    let lower_check = front_ordering(&lower, &coupled, &coupled, config.tol_cells);
    let upper_check = front_ordering(&coupled, &upper, &coupled, config.tol_cells);
    let prey_check = front_ordering(&coupled, &prey_only, &coupled, config.tol_cells);
    Ok(ComparisonReport {
        passed: lower_check.holds && upper_check.holds && failures.is_empty(),
        lower: lower_check,
        upper: upper_check,
        scalar_prey_upper: prey_check,
        final_fronts: FinalFronts {
            lower: lower.last().h,
            coupled: coupled.last().h,
            upper: upper.last().h,
            scalar_prey: prey_only.last().h,
        },
        failures,
        invariant_violations,
    })
}
