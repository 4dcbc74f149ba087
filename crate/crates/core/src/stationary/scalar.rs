use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{cells_for, residual_sup, uniform_nodes, ProfileMeta, StationaryProfile};
use crate::error::{Error, Result};
use crate::linalg::{max_abs_diff, sup_norm, Tridiagonal};

/// Condition at the right end of the truncated domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value")]
pub enum RightBc {
    /// `u(L) = K`, with `K` above `||f|| / lambda`.
    DirichletValue(f64),
    DirichletZero,
}

impl RightBc {
    fn value(self) -> f64 {
        match self {
            RightBc::DirichletValue(k) => k,
            RightBc::DirichletZero => 0.0,
        }
    }
}

/// `-d u'' = u (f - lambda u)` on `[0, length]`, `u(0) = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarBvpSpec {
    pub d: f64,
    pub lambda: f64,
    /// `f` at the uniform nodes `i * length / (f.len() - 1)`.
    pub f: Vec<f64>,
    pub length: f64,
    pub right_bc: RightBc,
}

impl ScalarBvpSpec {
    /// Sample `f` at the default grid density.
    pub fn sampled(d: f64, lambda: f64, f: impl Fn(f64) -> f64, length: f64, right_bc: RightBc) -> Self {
        let n = cells_for(length);
        Self {
            d,
            lambda,
            f: uniform_nodes(length, n).into_iter().map(f).collect(),
            length,
            right_bc,
        }
    }

    /// `pi sqrt(d / inf f)`: no positive solution with zero data below this
    /// length.
    pub fn solvability_threshold(&self) -> f64 {
        PI * (self.d / inf(&self.f)).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [("d", self.d), ("lambda", self.lambda), ("length", self.length)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::param(name, format!("must be positive and finite, got {value}")));
            }
        }
        if self.f.len() < 3 {
            return Err(Error::param("f", "needs at least 3 samples"));
        }
        let f_min = inf(&self.f);
        if !(f_min > 0.0 && self.f.iter().all(|x| x.is_finite())) {
            return Err(Error::param("f", format!("must be finite with positive infimum, got inf f = {f_min}")));
        }
        match self.right_bc {
            RightBc::DirichletZero => {
                let threshold = self.solvability_threshold();
                if self.length <= threshold {
                    return Err(Error::BelowSolvabilityThreshold {
                        length: self.length,
                        threshold,
                    });
                }
            }
            RightBc::DirichletValue(k) => {
                let bound = sup_norm(&self.f) / self.lambda;
                if !(k.is_finite() && k > bound) {
                    return Err(Error::param("K", format!("must exceed ||f|| / lambda = {bound}, got {k}")));
                }
            }
        }
        Ok(())
    }
}

fn inf(values: &[f64]) -> f64 {
    values.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Bracket width below which Newton polishing is attempted.
const NEWTON_WIDTH: f64 = 1e-3;
/// Iterations without progress before declaring a stall.
const STALL_WINDOW: usize = 50;
const MAX_ITERATIONS: usize = 1_000_000;

/// Solve by monotone iteration from the constant upper solution
/// `max(K, ||f|| / lambda)` and the lower solution `delta sin(pi x / L)`
/// (zero when no such `delta` exists and the right data is positive).
///
/// Iteration stops when successive iterates differ by less than `tol` in sup
/// norm, or earlier when a Newton polish started inside a bracket narrower
/// than `1e-3` converges without leaving it.
pub fn solve_scalar_bvp(spec: &ScalarBvpSpec, tol: f64) -> Result<StationaryProfile> {
    spec.validate()?;
    if !(tol > 0.0) {
        return Err(Error::param("tol", format!("must be positive, got {tol}")));
    }
    let ScalarBvpSpec { d, lambda, .. } = *spec;
    let f = &spec.f;
    let n = f.len() - 1;
    let dx = spec.length / n as f64;
    let right = spec.right_bc.value();
    let f_min = inf(f);
    let m = right.max(sup_norm(f) / lambda);

    let mut upper = vec![m; n + 1];
    upper[0] = 0.0;
    upper[n] = right;
    let mut lower = match lower_sine(spec, m, dx) {
        Some(w) => w,
        None if spec.right_bc == RightBc::DirichletZero => {
            return Err(Error::BelowSolvabilityThreshold {
                length: spec.length,
                threshold: spec.solvability_threshold(),
            })
        }
        None => {
            let mut w = vec![0.0; n + 1];
            w[n] = right;
            w
        }
    };

    // u -> u (f - lambda u) + kappa u is nondecreasing on [0, m].
    let kappa = (2.0 * lambda * m - f_min).max(0.0);
    let k = d / (dx * dx);
    let mut op = Tridiagonal::zeros(n - 1);
    for i in 0..n - 1 {
        op.lower[i] = -k;
        op.diag[i] = 2.0 * k + kappa;
        op.upper[i] = -k;
    }
    let op = op.factor();
    let sweep = |u: &[f64], out: &mut Vec<f64>| {
        out.clear();
        out.extend((1..n).map(|i| u[i] * (f[i] - lambda * u[i]) + kappa * u[i]));
        out[n - 2] += k * right;
        op.solve_in_place(out);
        out.insert(0, 0.0);
        out.push(right);
    };

    let mut next = Vec::with_capacity(n + 1);
    let mut best = f64::INFINITY;
    let mut since_best = 0;
    let mut newton_tried_at = f64::INFINITY;
    for iteration in 1..=MAX_ITERATIONS {
        sweep(&upper, &mut next);
        let diff_up = max_abs_diff(&upper, &next);
        std::mem::swap(&mut upper, &mut next);
        sweep(&lower, &mut next);
        let diff_lo = max_abs_diff(&lower, &next);
        std::mem::swap(&mut lower, &mut next);
        let diff = diff_up.max(diff_lo);

        let width = max_abs_diff(&upper, &lower);
        if width < NEWTON_WIDTH && width < 0.5 * newton_tried_at {
            newton_tried_at = width;
            if let Some(u) = newton_polish(spec, &upper, tol) {
                let inside = u
                    .iter()
                    .zip(&lower)
                    .zip(&upper)
                    .all(|((&x, &lo), &hi)| x >= lo - 1e-12 * m && x <= hi + 1e-12 * m);
                if inside {
                    let residual = residual_sup(&u, d, dx, |i| f[i] - lambda * u[i]);
                    return Ok(profile(spec, u, residual, iteration, true));
                }
            }
        }
        if diff < tol {
            let residual = residual_sup(&upper, d, dx, |i| f[i] - lambda * upper[i]);
            return Ok(profile(spec, upper, residual, iteration, false));
        }
        if diff < best {
            best = diff;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= STALL_WINDOW {
                return Err(Error::IterationStalled {
                    iterations: iteration,
                    last_difference: diff,
                });
            }
        }
    }
    Err(Error::IterationStalled {
        iterations: MAX_ITERATIONS,
        last_difference: best,
    })
}

/// Largest `delta = m / 2^k` making `delta sin(pi x / L)` a discrete lower
/// solution.
fn lower_sine(spec: &ScalarBvpSpec, m: f64, dx: f64) -> Option<Vec<f64>> {
    let n = spec.f.len() - 1;
    let k = spec.d / (dx * dx);
    let shape: Vec<f64> = (0..=n).map(|i| (PI * i as f64 / n as f64).sin()).collect();
    let mut delta = m;
    for _ in 0..64 {
        let w: Vec<f64> = shape.iter().map(|s| delta * s).collect();
        let ok = (1..n).all(|i| {
            let lhs = -k * (w[i - 1] - 2.0 * w[i] + w[i + 1]);
            lhs <= w[i] * (spec.f[i] - spec.lambda * w[i])
        });
        if ok {
            let mut w = w;
            w[0] = 0.0;
            w[n] = 0.0;
            return Some(w);
        }
        delta *= 0.5;
    }
    None
}

/// Newton iteration on the discrete equations from `start`; `None` when it
/// does not converge.
fn newton_polish(spec: &ScalarBvpSpec, start: &[f64], tol: f64) -> Option<Vec<f64>> {
    let n = spec.f.len() - 1;
    let dx = spec.length / n as f64;
    let k = spec.d / (dx * dx);
    let (f, lambda) = (&spec.f, spec.lambda);
    let mut u = start.to_vec();
    let mut jac = Tridiagonal::zeros(n - 1);
    let mut rhs = vec![0.0; n - 1];
    let mut scratch = Vec::new();
    let target = (tol * 1e-3).max(1e-15 * (1.0 + sup_norm(start)));
    for _ in 0..30 {
        for i in 1..n {
            let r = -k * (u[i - 1] - 2.0 * u[i] + u[i + 1]) - u[i] * (f[i] - lambda * u[i]);
            rhs[i - 1] = -r;
            jac.lower[i - 1] = -k;
            jac.diag[i - 1] = 2.0 * k - (f[i] - 2.0 * lambda * u[i]);
            jac.upper[i - 1] = -k;
        }
        jac.solve_in_place(&mut rhs, &mut scratch);
        let step = sup_norm(&rhs);
        if !step.is_finite() {
            return None;
        }
        for i in 1..n {
            u[i] += rhs[i - 1];
        }
        if step < target {
            return Some(u);
        }
    }
    None
}

fn profile(spec: &ScalarBvpSpec, values: Vec<f64>, residual: f64, iterations: usize, newton: bool) -> StationaryProfile {
    StationaryProfile {
        x: uniform_nodes(spec.length, values.len() - 1),
        values,
        residual_sup: residual,
        iterations,
        newton,
        meta: ProfileMeta {
            d: spec.d,
            lambda: spec.lambda,
            right_bc: spec.right_bc,
            solved_length: spec.length,
            truncation_discrepancy: None,
        },
    }
}

/// Truncation schedule for half-line profiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalflineConfig {
    /// Length of the returned profile.
    pub l0: f64,
    /// Sup difference on `[0, l0]` between consecutive truncations.
    pub tol: f64,
    pub max_doublings: usize,
}

impl Default for HalflineConfig {
    fn default() -> Self {
        Self {
            l0: 10.0,
            tol: 1e-6,
            max_doublings: 6,
        }
    }
}

/// Profile on `[0, l0]` of the half-line problem, from truncations at
/// `2 l0, 4 l0, ...` with right data `1.1 ||f|| / lambda`.
pub fn halfline_profile<F>(d: f64, lambda: f64, f: F, config: &HalflineConfig) -> Result<StationaryProfile>
where
    F: Fn(f64) -> f64,
{
    if !(config.l0 > 0.0 && config.tol > 0.0) {
        return Err(Error::param("l0", "l0 and tol must be positive"));
    }
    let n0 = cells_for(config.l0);
    let inner_tol = config.tol * 1e-2;
    let mut previous: Option<StationaryProfile> = None;
    let mut discrepancy = f64::INFINITY;
    for doubling in 0..=config.max_doublings {
        let scale = 1usize << (doubling + 1);
        let length = config.l0 * scale as f64;
        let n = n0 * scale;
        let samples: Vec<f64> = uniform_nodes(length, n).into_iter().map(&f).collect();
        let k = 1.1 * sup_norm(&samples) / lambda;
        let spec = ScalarBvpSpec {
            d,
            lambda,
            f: samples,
            length,
            right_bc: RightBc::DirichletValue(k),
        };
        let mut current = solve_scalar_bvp(&spec, inner_tol)?;
        current.values.truncate(n0 + 1);
        current.x.truncate(n0 + 1);
        if let Some(prev) = &previous {
            discrepancy = max_abs_diff(&prev.values, &current.values);
            if discrepancy < config.tol {
                let dx = config.l0 / n0 as f64;
                let g = &spec.f;
                let u = &current.values;
                current.residual_sup = residual_sup(u, d, dx, |i| g[i] - lambda * u[i]);
                current.meta.truncation_discrepancy = Some(discrepancy);
                return Ok(current);
            }
        }
        previous = Some(current);
    }
    Err(Error::TruncationNotConverged {
        doublings: config.max_doublings,
        discrepancy,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PerturbationSign {
    Plus,
    Minus,
}

/// Half-line profile with `f` replaced by `f + eps` or `f - eps`.
pub fn epsilon_perturbed_profile<F>(
    d: f64,
    lambda: f64,
    f: F,
    eps: f64,
    sign: PerturbationSign,
    config: &HalflineConfig,
) -> Result<StationaryProfile>
where
    F: Fn(f64) -> f64,
{
    if !(eps.is_finite() && eps >= 0.0) {
        return Err(Error::param("eps", format!("must be finite and nonnegative, got {eps}")));
    }
    match sign {
        PerturbationSign::Plus => halfline_profile(d, lambda, |x| f(x) + eps, config),
        PerturbationSign::Minus => {
            let reach = config.l0 * (1usize << (config.max_doublings + 1)) as f64;
            let f_inf = uniform_nodes(reach, cells_for(reach)).into_iter().map(&f).fold(f64::INFINITY, f64::min);
            if eps >= f_inf {
                return Err(Error::param("eps", format!("must be below inf f = {f_inf}, got {eps}")));
            }
            halfline_profile(d, lambda, |x| f(x) - eps, config)
        }
    }
}
