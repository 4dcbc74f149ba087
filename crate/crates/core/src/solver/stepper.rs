use serde::{Deserialize, Serialize};

use super::{FluxOrder, FrontFixedState, Hooks, ProblemSpec};
use crate::error::{Error, Result};
use crate::linalg::Tridiagonal;
use crate::model::{ExpansionParams, ModelParams, ProblemVariant};

/// Gradients `(u_x, v_x)` at one front, in physical units.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Flux {
    pub u: f64,
    pub v: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundaryFluxes {
    /// At `x = h(t)`.
    pub right: Flux,
    /// At `x = g(t)`; only for the two-front problem.
    pub left: Option<Flux>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FrontSpeeds {
    pub hprime: f64,
    pub gprime: f64,
    pub fluxes: BoundaryFluxes,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    pub dt: f64,
    /// Speeds that advanced the fronts during this step.
    pub speeds: FrontSpeeds,
    /// Values clamped to zero in this step.
    pub clamped: u64,
}

fn right_gradient(w: &[f64], order: FluxOrder, dy: f64) -> f64 {
    let n = w.len() - 1;
    match order {
        FluxOrder::First => (w[n] - w[n - 1]) / dy,
        FluxOrder::Second => (3.0 * w[n] - 4.0 * w[n - 1] + w[n - 2]) / (2.0 * dy),
    }
}

fn left_gradient(w: &[f64], order: FluxOrder, dy: f64) -> f64 {
    match order {
        FluxOrder::First => (w[1] - w[0]) / dy,
        FluxOrder::Second => (-3.0 * w[0] + 4.0 * w[1] - w[2]) / (2.0 * dy),
    }
}

fn fluxes_quiet(state: &FrontFixedState, variant: ProblemVariant, order: FluxOrder) -> BoundaryFluxes {
    let dy = 1.0 / state.n_cells() as f64;
    let l = state.length();
    let right = Flux {
        u: right_gradient(&state.u, order, dy) / l,
        v: right_gradient(&state.v, order, dy) / l,
    };
    let left = (variant == ProblemVariant::Tfb).then(|| Flux {
        u: left_gradient(&state.u, order, dy) / l,
        v: left_gradient(&state.v, order, dy) / l,
    });
    BoundaryFluxes { right, left }
}

/// One-sided boundary gradients of `state` at its free fronts.
pub fn boundary_fluxes(state: &FrontFixedState, variant: ProblemVariant, order: FluxOrder) -> BoundaryFluxes {
    let fluxes = fluxes_quiet(state, variant, order);
    if fluxes.right.u > 0.0 || fluxes.right.v > 0.0 {
        log::warn!(
            "positive gradient at the right front (u_x = {}, v_x = {}) at t = {}",
            fluxes.right.u,
            fluxes.right.v,
            state.t
        );
    }
    if let Some(left) = fluxes.left {
        if left.u < 0.0 || left.v < 0.0 {
            log::warn!(
                "negative gradient at the left front (u_x = {}, v_x = {}) at t = {}",
                left.u,
                left.v,
                state.t
            );
        }
    }
    fluxes
}

/// Stefan-condition speeds of the fronts for `state`.
pub fn front_speeds(
    state: &FrontFixedState,
    variant: ProblemVariant,
    expansion: &ExpansionParams,
    order: FluxOrder,
    hooks: &Hooks,
) -> FrontSpeeds {
    let fluxes = fluxes_quiet(state, variant, order);
    if hooks.freeze_fronts {
        return FrontSpeeds {
            hprime: 0.0,
            gprime: 0.0,
            fluxes,
        };
    }
    let (mu_r, rho_r) = expansion.right();
    let hprime = -mu_r * (fluxes.right.u + rho_r * fluxes.right.v);
    let gprime = match (fluxes.left, expansion.left()) {
        (Some(flux), Some((mu_l, rho_l))) => -mu_l * (flux.u + rho_l * flux.v),
        _ => 0.0,
    };
    FrontSpeeds {
        hprime,
        gprime,
        fluxes,
    }
}

/// Reusable IMEX stepper for one problem.
#[derive(Debug, Clone)]
pub struct Stepper {
    variant: ProblemVariant,
    params: ModelParams,
    expansion: ExpansionParams,
    order: FluxOrder,
    hooks: Hooks,
    clamp_budget: u64,
    clamps: u64,
    matrix: Tridiagonal,
    scratch: Vec<f64>,
    next_u: Vec<f64>,
    next_v: Vec<f64>,
}

/// Largest tolerated backward front speed.
const SPEED_TOL: f64 = 1e-10;

impl Stepper {
    pub fn new(spec: &ProblemSpec) -> Self {
        Self {
            variant: spec.variant,
            params: spec.params,
            expansion: spec.expansion,
            order: spec.numerics.flux_order,
            hooks: spec.hooks,
            clamp_budget: spec.numerics.clamp_budget,
            clamps: 0,
            matrix: Tridiagonal::zeros(0),
            scratch: Vec::new(),
            next_u: Vec::new(),
            next_v: Vec::new(),
        }
    }

    fn predation(&self) -> f64 {
        if self.hooks.no_predation {
            0.0
        } else {
            self.params.a
        }
    }

    /// Total values clamped to zero so far.
    pub fn clamp_count(&self) -> u64 {
        self.clamps
    }

    pub fn speeds(&self, state: &FrontFixedState) -> FrontSpeeds {
        front_speeds(state, self.variant, &self.expansion, self.order, &self.hooks)
    }

    /// Automatic step for `state` before any failure-driven halving.
    pub fn auto_dt(&self, state: &FrontFixedState, speeds: &FrontSpeeds) -> f64 {
        let dx = state.dx();
        let mut dt = 0.25 * dx * dx / self.params.d.max(1.0);
        if !self.hooks.disable_reaction {
            let ModelParams { b, c, .. } = self.params;
            let a = self.predation();
            let stiffness = state.u.iter().zip(&state.v).fold(0.0_f64, |m, (&w, &z)| {
                let row_u = (1.0 - 2.0 * w - a * z).abs() + a * w;
                let row_v = (c - 2.0 * z + b * w).abs() + b * z;
                m.max(row_u).max(row_v)
            });
            if stiffness > 0.0 {
                dt = dt.min(0.1 / stiffness);
            }
        }
        let speed = speeds.hprime.abs().max(speeds.gprime.abs());
        if speed > 0.0 {
            dt = dt.min(0.5 * dx / speed);
        }
        dt
    }

    /// Advance `state` by `dt`. On failure `state` is left untouched.
    pub fn step(&mut self, state: &mut FrontFixedState, dt: f64) -> Result<StepInfo> {
        let fail = |reason: String| Error::StepFailure { t: state.t, reason };
        let speeds = self.speeds(state);
        let FrontSpeeds { hprime, gprime, .. } = speeds;
        if !hprime.is_finite() || !gprime.is_finite() {
            return Err(fail(format!("non-finite front speed (h' = {hprime}, g' = {gprime})")));
        }
        if hprime < -SPEED_TOL || gprime > SPEED_TOL {
            return Err(fail(format!(
                "front moving inwards (h' = {hprime:e}, g' = {gprime:e})"
            )));
        }

        let n = state.n_cells();
        let dy = 1.0 / n as f64;
        let l = state.length();
        let ModelParams { b, c, d, .. } = self.params;
        let a = self.predation();
        let react = !self.hooks.disable_reaction;
        let neumann_left = self.variant == ProblemVariant::Nfb;

        // Explicit stage: advection and reaction.
        self.next_u.clear();
        self.next_u.resize(n + 1, 0.0);
        self.next_v.clear();
        self.next_v.resize(n + 1, 0.0);
        let first = if neumann_left { 0 } else { 1 };
        for i in first..n {
            let w = state.u[i];
            let z = state.v[i];
            let (wy, zy) = if i == 0 {
                (0.0, 0.0)
            } else {
                (
                    (state.u[i + 1] - state.u[i - 1]) / (2.0 * dy),
                    (state.v[i + 1] - state.v[i - 1]) / (2.0 * dy),
                )
            };
            let beta = (gprime + i as f64 * dy * (hprime - gprime)) / l;
            let (ru, rv) = if react {
                (w * (1.0 - w - a * z), z * (c - z + b * w))
            } else {
                (0.0, 0.0)
            };
            self.next_u[i] = w + dt * (beta * wy + ru);
            self.next_v[i] = z + dt * (beta * zy + rv);
        }

        // Implicit diffusion.
        let r_u = dt / (l * l * dy * dy);
        for (values, r) in [(&mut self.next_u, r_u), (&mut self.next_v, d * r_u)] {
            build_diffusion(&mut self.matrix, n, r, neumann_left);
            self.matrix.solve_in_place(values, &mut self.scratch);
        }

        // Positivity and finiteness.
        let mut clamped = 0;
        for (name, values, scale) in [
            ("u", &mut self.next_u, state.sup_u().max(1.0)),
            ("v", &mut self.next_v, state.sup_v().max(1.0)),
        ] {
            let floor = -10.0 * f64::EPSILON * scale;
            for (i, x) in values.iter_mut().enumerate() {
                if !x.is_finite() {
                    return Err(fail(format!("non-finite {name} at node {i}")));
                }
                if *x < 0.0 {
                    if *x < floor {
                        return Err(fail(format!("{name} undershoot {x:e} at node {i}")));
                    }
                    *x = 0.0;
                    clamped += 1;
                }
            }
        }
        if self.clamps + clamped > self.clamp_budget {
            return Err(fail(format!(
                "clamp budget of {} exceeded",
                self.clamp_budget
            )));
        }

        let h = state.h + dt * hprime;
        let g = state.g + dt * gprime;
        if !(h.is_finite() && g.is_finite() && h > g) {
            return Err(fail(format!("invalid fronts g = {g}, h = {h}")));
        }

        self.clamps += clamped;
        std::mem::swap(&mut state.u, &mut self.next_u);
        std::mem::swap(&mut state.v, &mut self.next_v);
        state.h = h;
        state.g = g;
        state.t += dt;
        Ok(StepInfo { dt, speeds, clamped })
    }
}

/// `I - r D_yy` with Dirichlet rows at the ends, or the reflected
/// (ghost-node) Neumann row at `y = 0`.
fn build_diffusion(m: &mut Tridiagonal, n: usize, r: f64, neumann_left: bool) {
    if m.len() != n + 1 {
        *m = Tridiagonal::zeros(n + 1);
    }
    for i in 1..n {
        m.lower[i] = -r;
        m.diag[i] = 1.0 + 2.0 * r;
        m.upper[i] = -r;
    }
    if neumann_left {
        m.diag[0] = 1.0 + 2.0 * r;
        m.upper[0] = -2.0 * r;
    } else {
        m.diag[0] = 1.0;
        m.upper[0] = 0.0;
    }
    m.lower[n] = 0.0;
    m.diag[n] = 1.0;
}

/// Single step of `spec`'s dynamics from `state`, returning the new state.
pub fn step(state: &FrontFixedState, spec: &ProblemSpec, dt: f64) -> Result<FrontFixedState> {
    let mut next = state.clone();
    Stepper::new(spec).step(&mut next, dt)?;
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ExpansionParams, InitialData, ModelParams, ProfileRule};
    use crate::solver::{init_state, init_state_unchecked, NumericsConfig, TimeStep};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn dfb_spec(n_cells: usize) -> ProblemSpec {
        ProblemSpec::standard(
            ProblemVariant::Dfb,
            ModelParams::new(0.5, 0.5, 1.0, 1.0).unwrap(),
            ExpansionParams::one_sided(1.0, 1.0).unwrap(),
            1.0,
            NumericsConfig {
                n_cells,
                dt: TimeStep::Fixed(1e-4),
                ..NumericsConfig::default()
            },
        )
    }

    fn sampled_state(n: usize, f: impl Fn(f64) -> f64) -> FrontFixedState {
        let u: Vec<f64> = (0..=n).map(|i| f(i as f64 / n as f64)).collect();
        FrontFixedState {
            t: 0.0,
            g: 0.0,
            h: 1.0,
            v: u.clone(),
            u,
        }
    }

    #[test]
    fn second_order_flux_matches_analytic_slope() {
        let state = sampled_state(512, |x| (PI * x).sin());
        let f = boundary_fluxes(&state, ProblemVariant::Dfb, FluxOrder::Second);
        let err = (f.right.u + PI).abs();
        assert!(err < 20.0 / (512.0 * 512.0), "err = {err}");
        assert!(f.left.is_none());
    }

    #[test]
    fn second_order_flux_beats_first_order() {
        // sin(pi x)(2 - x): slope -pi and nonzero curvature at x = 1.
        let state = sampled_state(512, |x| (PI * x).sin() * (2.0 - x));
        let e1 = (boundary_fluxes(&state, ProblemVariant::Dfb, FluxOrder::First).right.u + PI).abs();
        let e2 = (boundary_fluxes(&state, ProblemVariant::Dfb, FluxOrder::Second).right.u + PI).abs();
        assert!(e2 < e1, "first {e1} second {e2}");
    }

    #[test]
    fn zero_profile_has_zero_flux() {
        let state = sampled_state(64, |_| 0.0);
        let f = boundary_fluxes(&state, ProblemVariant::Tfb, FluxOrder::Second);
        assert_eq!(f.right, Flux::default());
        assert_eq!(f.left, Some(Flux::default()));
    }

    #[test]
    fn zero_state_is_an_equilibrium() {
        let mut spec = dfb_spec(64);
        spec.initial = InitialData {
            h0: 1.0,
            u0: ProfileRule::Sine { amplitude: 0.0 },
            v0: ProfileRule::Sine { amplitude: 0.0 },
        };
        spec.hooks.skip_validation = true;
        let state = init_state(&spec).unwrap();
        let mut stepper = Stepper::new(&spec);
        let mut next = state.clone();
        let info = stepper.step(&mut next, 1e-3).unwrap();
        assert_eq!(info.speeds.hprime, 0.0);
        assert_eq!(next.u, state.u);
        assert_eq!(next.v, state.v);
        assert_eq!(next.h, state.h);
    }

    #[test]
    fn first_step_front_matches_initial_slope() {
        // u_x(0, h0) = -pi for sin(pi x): h(dt) = 1 + dt (pi + pi), up to
        // the O(n^-2) stencil error.
        let spec = dfb_spec(128);
        let state = init_state(&spec).unwrap();
        let next = step(&state, &spec, 1e-4).unwrap();
        let expected = 1.0 + 1e-4 * 2.0 * PI;
        assert_abs_diff_eq!(next.h, expected, epsilon = 5e-7);
        assert_abs_diff_eq!(next.h, 1.000628, epsilon = 1e-6);
    }

    #[test]
    fn step_preserves_invariants() {
        let spec = dfb_spec(64);
        let mut state = init_state(&spec).unwrap();
        let mut stepper = Stepper::new(&spec);
        let mut last_h = state.h;
        for _ in 0..200 {
            stepper.step(&mut state, 1e-3).unwrap();
            assert!(state.h > last_h);
            last_h = state.h;
            assert!(state.u.iter().chain(&state.v).all(|&x| x >= 0.0));
            assert_eq!(state.u[0], 0.0);
            assert_eq!(*state.v.last().unwrap(), 0.0);
        }
    }

    #[test]
    fn non_finite_data_is_a_step_failure() {
        let spec = dfb_spec(64);
        let mut state = init_state(&spec).unwrap();
        state.u[10] = f64::NAN;
        let before = state.clone();
        let err = Stepper::new(&spec).step(&mut state, 1e-4).unwrap_err();
        assert!(matches!(err, Error::StepFailure { .. }));
        assert_eq!(state.h, before.h);
    }

    #[test]
    fn inward_front_is_a_step_failure() {
        let spec = dfb_spec(64);
        let mut state = init_state_unchecked(&spec);
        // Negative profile: gradient at the front is positive.
        for x in state.u.iter_mut().chain(state.v.iter_mut()) {
            *x = -*x;
        }
        let err = Stepper::new(&spec).step(&mut state, 1e-4).unwrap_err();
        assert!(err.to_string().contains("inwards"), "{err}");
    }

    #[test]
    fn tfb_fronts_move_apart_symmetrically() {
        let spec = ProblemSpec::standard(
            ProblemVariant::Tfb,
            ModelParams::new(0.5, 0.5, 1.0, 1.0).unwrap(),
            ExpansionParams::TwoSided {
                mu_l: 1.0,
                rho_l: 1.0,
                mu_r: 1.0,
                rho_r: 1.0,
            },
            1.0,
            NumericsConfig {
                n_cells: 64,
                dt: TimeStep::Fixed(1e-3),
                ..NumericsConfig::default()
            },
        );
        let mut state = init_state(&spec).unwrap();
        let mut stepper = Stepper::new(&spec);
        for _ in 0..100 {
            stepper.step(&mut state, 1e-3).unwrap();
        }
        assert!(state.h > 1.0 && state.g < -1.0);
        assert_abs_diff_eq!(state.h, -state.g, epsilon = 1e-10);
    }
}
