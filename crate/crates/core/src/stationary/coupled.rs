use serde::{Deserialize, Serialize};

use super::scalar::{halfline_profile, HalflineConfig};
use super::{cells_for, uniform_nodes, StationaryProfile};
use crate::error::{Error, Result};
use crate::linalg::{max_abs_diff, sup_norm, Tridiagonal};
use crate::model::{dfb_sandwich_condition, ModelParams};

/// Limits of the four bound profiles as `x -> infinity`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FarField {
    pub ubar: f64,
    pub vbar: f64,
    pub ulow: f64,
    pub vlow: f64,
}

impl FarField {
    pub fn expected(params: &ModelParams) -> Self {
        let ModelParams { a, b, c, .. } = *params;
        let ulow = 1.0 - a * (b + c);
        Self {
            ubar: 1.0,
            vbar: b + c,
            ulow,
            vlow: c + b * ulow,
        }
    }
}

/// Ordered bounds `ulow <= u <= ubar`, `vlow <= v <= vbar` for positive
/// stationary solutions on the half line, sampled on `[0, length]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoupledBounds {
    pub x: Vec<f64>,
    pub ubar: Vec<f64>,
    pub vbar: Vec<f64>,
    pub ulow: Vec<f64>,
    pub vlow: Vec<f64>,
    pub far_field_expected: FarField,
    /// Values at the right end of the grid.
    pub far_field_observed: FarField,
}

impl CoupledBounds {
    pub fn length(&self) -> f64 {
        *self.x.last().unwrap()
    }

    fn eval(&self, values: &[f64], x: f64) -> f64 {
        let l = self.length();
        if x >= l {
            *values.last().unwrap()
        } else {
            crate::linalg::interpolate_uniform(values, 0.0, l, x.max(0.0))
        }
    }

    /// `(ulow, ubar, vlow, vbar)` at `x`.
    pub fn band_at(&self, x: f64) -> (f64, f64, f64, f64) {
        (
            self.eval(&self.ulow, x),
            self.eval(&self.ubar, x),
            self.eval(&self.vlow, x),
            self.eval(&self.vbar, x),
        )
    }
}

fn require_sandwich(params: &ModelParams) -> Result<()> {
    params.validate()?;
    if !dfb_sandwich_condition(params) {
        return Err(Error::Precondition(format!(
            "a (b + c) = {} must be below 1",
            params.a * (params.b + params.c)
        )));
    }
    Ok(())
}

/// The four bound profiles, each a half-line profile driven by the previous
/// one: `-u'' = u (1 - u)`, `-d v'' = v (c - v + b ubar)`,
/// `-u'' = u (1 - a vbar - u)`, `-d v'' = v (c - v + b ulow)`.
pub fn coupled_bounds(params: &ModelParams, length: f64, tol: f64) -> Result<CoupledBounds> {
    require_sandwich(params)?;
    let ModelParams { a, b, c, d } = *params;
    let config = HalflineConfig {
        l0: length,
        tol,
        ..HalflineConfig::default()
    };
    let ubar = halfline_profile(1.0, 1.0, |_| 1.0, &config)?;
    let vbar = halfline_profile(d, 1.0, |x| c + b * ubar.eval(x), &config)?;
    let ulow = halfline_profile(1.0, 1.0, |x| 1.0 - a * vbar.eval(x), &config)?;
    let vlow = halfline_profile(d, 1.0, |x| c + b * ulow.eval(x), &config)?;
    let last = |p: &StationaryProfile| *p.values.last().unwrap();
    Ok(CoupledBounds {
        x: ubar.x.clone(),
        far_field_expected: FarField::expected(params),
        far_field_observed: FarField {
            ubar: last(&ubar),
            vbar: last(&vbar),
            ulow: last(&ulow),
            vlow: last(&vlow),
        },
        ubar: ubar.values,
        vbar: vbar.values,
        ulow: ulow.values,
        vlow: vlow.values,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoupledSolution {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    /// Sup of the discrete residuals of both equations.
    pub residual_sup: f64,
    pub iterations: usize,
    /// Sup distance between the limits of the two monotone sequences.
    pub gap: f64,
    pub bounds: CoupledBounds,
}

const STALL_WINDOW: usize = 50;
const MAX_ITERATIONS: usize = 1_000_000;

/// Positive solution of the coupled stationary system on `[0, length]`,
/// `u(0) = v(0) = 0`, right values taken from `ubar` and `vbar`.
///
/// Mixed quasimonotone iteration: `(u, v)` pairs start from `(ubar, vlow)`
/// and `(ulow, vbar)`, and each step solves one linear problem per component
/// using the opposite pair's predator or prey. Stops when both pairs move by
/// less than `tol`.
pub fn solve_coupled_stationary(params: &ModelParams, length: f64, tol: f64) -> Result<CoupledSolution> {
    let bounds = coupled_bounds(params, length, tol)?;
    let ModelParams { a, b, c, d } = *params;
    let n = bounds.x.len() - 1;
    debug_assert_eq!(n, cells_for(length));
    let dx = length / n as f64;
    let u_right = *bounds.ubar.last().unwrap();
    let v_right = *bounds.vbar.last().unwrap();

    let u_max = sup_norm(&bounds.ubar);
    let v_max = sup_norm(&bounds.vbar);
    // Shifts making each reaction nondecreasing in its own species on the box.
    let kappa_u = (2.0 * u_max + a * v_max - 1.0).max(0.0);
    let kappa_v = (2.0 * v_max - c).max(0.0);
    let op_u = shifted_laplacian(n, 1.0 / (dx * dx), kappa_u);
    let op_v = shifted_laplacian(n, d / (dx * dx), kappa_v);
    let ku = 1.0 / (dx * dx);
    let kv = d / (dx * dx);

    let solve = |op: &crate::linalg::Factored, rhs: Vec<f64>, k: f64, right: f64| {
        let mut inner = rhs;
        inner[n - 2] += k * right;
        op.solve_in_place(&mut inner);
        let mut out = Vec::with_capacity(n + 1);
        out.push(0.0);
        out.extend(inner);
        out.push(right);
        out
    };
    let fu = |u: &[f64], v: &[f64], i: usize| u[i] * (1.0 - u[i] - a * v[i]) + kappa_u * u[i];
    let fv = |u: &[f64], v: &[f64], i: usize| v[i] * (c - v[i] + b * u[i]) + kappa_v * v[i];

    let mut u_hi = bounds.ubar.clone();
    let mut v_lo = bounds.vlow.clone();
    let mut u_lo = bounds.ulow.clone();
    let mut v_hi = bounds.vbar.clone();
    for w in [&mut u_hi, &mut u_lo] {
        w[n] = u_right;
    }
    for w in [&mut v_hi, &mut v_lo] {
        w[n] = v_right;
    }

    let mut best = f64::INFINITY;
    let mut since_best = 0;
    for iteration in 1..=MAX_ITERATIONS {
        let nu_hi = solve(&op_u, (1..n).map(|i| fu(&u_hi, &v_lo, i)).collect(), ku, u_right);
        let nu_lo = solve(&op_u, (1..n).map(|i| fu(&u_lo, &v_hi, i)).collect(), ku, u_right);
        let nv_hi = solve(&op_v, (1..n).map(|i| fv(&u_hi, &v_hi, i)).collect(), kv, v_right);
        let nv_lo = solve(&op_v, (1..n).map(|i| fv(&u_lo, &v_lo, i)).collect(), kv, v_right);
        let diff = [
            max_abs_diff(&u_hi, &nu_hi),
            max_abs_diff(&u_lo, &nu_lo),
            max_abs_diff(&v_hi, &nv_hi),
            max_abs_diff(&v_lo, &nv_lo),
        ]
        .into_iter()
        .fold(0.0, f64::max);
        u_hi = nu_hi;
        u_lo = nu_lo;
        v_hi = nv_hi;
        v_lo = nv_lo;

        if diff < tol {
            let u: Vec<f64> = u_hi.iter().zip(&u_lo).map(|(p, q)| 0.5 * (p + q)).collect();
            let v: Vec<f64> = v_hi.iter().zip(&v_lo).map(|(p, q)| 0.5 * (p + q)).collect();
            let gap = max_abs_diff(&u_hi, &u_lo).max(max_abs_diff(&v_hi, &v_lo));
            let residual_u = super::residual_sup(&u, 1.0, dx, |i| 1.0 - u[i] - a * v[i]);
            let residual_v = super::residual_sup(&v, d, dx, |i| c - v[i] + b * u[i]);
            return Ok(CoupledSolution {
                x: uniform_nodes(length, n),
                u,
                v,
                residual_sup: residual_u.max(residual_v),
                iterations: iteration,
                gap,
                bounds,
            });
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

fn shifted_laplacian(n: usize, k: f64, kappa: f64) -> crate::linalg::Factored {
    let mut op = Tridiagonal::zeros(n - 1);
    for i in 0..n - 1 {
        op.lower[i] = -k;
        op.diag[i] = 2.0 * k + kappa;
        op.upper[i] = -k;
    }
    op.factor()
}
