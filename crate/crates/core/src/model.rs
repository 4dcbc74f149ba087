//! Parameters, problem variants, initial data and the closed-form quantities
//! of the free-boundary prey-predator model
//!
//! ```text
//! u_t - u_xx   = u (1 - u - a v)
//! v_t - d v_xx = v (c - v + b u)
//! h'(t) = -mu (u_x + rho v_x)   at x = h(t)
//! ```
//!
//! Everything here is a pure function of its inputs.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{interpolate_uniform, sup_norm, trapezoid};

/// Samples used when a closed-form initial profile has to be tabulated
/// (validation, quadrature, sup norms).
pub const CLOSED_FORM_SAMPLES: usize = 1025;

fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be positive and finite, got {value}")))
    }
}

/// Interaction coefficients. Prey diffusivity and growth rate are 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Predation pressure on the prey.
    pub a: f64,
    /// Conversion of prey into predator growth.
    pub b: f64,
    /// Predator intrinsic growth rate.
    pub c: f64,
    /// Predator diffusivity.
    pub d: f64,
}

impl ModelParams {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let p = Self { a, b, c, d };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("a", self.a)?;
        check_positive("b", self.b)?;
        check_positive("c", self.c)?;
        check_positive("d", self.d)
    }
}

/// Free-boundary expansion coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExpansionParams {
    /// Right front only (DFB, NFB).
    OneSided { mu: f64, rho: f64 },
    /// Two fronts (TFB); `_l` drives `g(t)`, `_r` drives `h(t)`.
    TwoSided {
        mu_l: f64,
        rho_l: f64,
        mu_r: f64,
        rho_r: f64,
    },
}

impl ExpansionParams {
    pub fn one_sided(mu: f64, rho: f64) -> Result<Self> {
        let e = ExpansionParams::OneSided { mu, rho };
        e.validate()?;
        Ok(e)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ExpansionParams::OneSided { mu, rho } => {
                check_positive("mu", mu)?;
                check_positive("rho", rho)
            }
            ExpansionParams::TwoSided {
                mu_l,
                rho_l,
                mu_r,
                rho_r,
            } => {
                check_positive("mu_l", mu_l)?;
                check_positive("rho_l", rho_l)?;
                check_positive("mu_r", mu_r)?;
                check_positive("rho_r", rho_r)
            }
        }
    }

    /// `(mu, rho)` governing the right front.
    pub fn right(&self) -> (f64, f64) {
        match *self {
            ExpansionParams::OneSided { mu, rho } => (mu, rho),
            ExpansionParams::TwoSided { mu_r, rho_r, .. } => (mu_r, rho_r),
        }
    }

    /// `(mu, rho)` governing the left front, if there is one.
    pub fn left(&self) -> Option<(f64, f64)> {
        match *self {
            ExpansionParams::OneSided { .. } => None,
            ExpansionParams::TwoSided { mu_l, rho_l, .. } => Some((mu_l, rho_l)),
        }
    }

    /// Same shape with every `mu` replaced.
    pub fn with_mu(&self, mu: f64) -> Self {
        match *self {
            ExpansionParams::OneSided { rho, .. } => ExpansionParams::OneSided { mu, rho },
            ExpansionParams::TwoSided { rho_l, rho_r, .. } => ExpansionParams::TwoSided {
                mu_l: mu,
                rho_l,
                mu_r: mu,
                rho_r,
            },
        }
    }
}

/// Left boundary condition of the problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProblemVariant {
    /// Dirichlet at `x = 0`, free right front.
    #[serde(rename = "DFB")]
    Dfb,
    /// Neumann at `x = 0`, free right front.
    #[serde(rename = "NFB")]
    Nfb,
    /// Two free fronts `g(t) < h(t)`.
    #[serde(rename = "TFB")]
    Tfb,
}

impl fmt::Display for ProblemVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProblemVariant::Dfb => "DFB",
            ProblemVariant::Nfb => "NFB",
            ProblemVariant::Tfb => "TFB",
        })
    }
}

impl FromStr for ProblemVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "DFB" => Ok(ProblemVariant::Dfb),
            "NFB" => Ok(ProblemVariant::Nfb),
            "TFB" => Ok(ProblemVariant::Tfb),
            other => Err(Error::param(
                "variant",
                format!("expected DFB, NFB or TFB, got `{other}`"),
            )),
        }
    }
}

/// Sampling rule for one initial profile over the initial interval
/// `[x_left, x_right]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ProfileRule {
    /// `A sin(pi (x - x_left) / |interval|)`.
    Sine { amplitude: f64 },
    /// `A cos(pi (x - x_left) / (2 |interval|))`; for NFB this is
    /// `A cos(pi x / (2 h0))`.
    HalfCosine { amplitude: f64 },
    /// Uniform samples spanning the interval, linearly interpolated.
    Samples { values: Vec<f64> },
}

impl ProfileRule {
    /// The default compatible family for a variant.
    pub fn default_for(variant: ProblemVariant, amplitude: f64) -> Self {
        match variant {
            ProblemVariant::Nfb => ProfileRule::HalfCosine { amplitude },
            ProblemVariant::Dfb | ProblemVariant::Tfb => ProfileRule::Sine { amplitude },
        }
    }

    pub fn eval(&self, x_left: f64, x_right: f64, x: f64) -> f64 {
        let width = x_right - x_left;
        let s = ((x - x_left) / width).clamp(0.0, 1.0);
        match self {
            ProfileRule::Sine { amplitude } => amplitude * (PI * s).sin(),
            ProfileRule::HalfCosine { amplitude } => amplitude * (0.5 * PI * s).cos(),
            ProfileRule::Samples { values } => interpolate_uniform(values, x_left, x_right, x),
        }
    }

    /// Tabulate on `n` uniform points (explicit samples are returned as-is).
    pub fn tabulate(&self, x_left: f64, x_right: f64, n: usize) -> Vec<f64> {
        match self {
            ProfileRule::Samples { values } => values.clone(),
            _ => (0..n)
                .map(|i| {
                    let x = x_left + (x_right - x_left) * i as f64 / (n - 1) as f64;
                    self.eval(x_left, x_right, x)
                })
                .collect(),
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        match self {
            ProfileRule::Sine { amplitude } => ProfileRule::Sine {
                amplitude: amplitude * factor,
            },
            ProfileRule::HalfCosine { amplitude } => ProfileRule::HalfCosine {
                amplitude: amplitude * factor,
            },
            ProfileRule::Samples { values } => ProfileRule::Samples {
                values: values.iter().map(|v| v * factor).collect(),
            },
        }
    }
}

/// Initial habitat and populations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialData {
    /// Initial habitat length (half-width for TFB).
    pub h0: f64,
    pub u0: ProfileRule,
    pub v0: ProfileRule,
}

impl InitialData {
    /// Default compatible families with the given amplitudes.
    pub fn standard(variant: ProblemVariant, h0: f64, amplitude_u: f64, amplitude_v: f64) -> Self {
        Self {
            h0,
            u0: ProfileRule::default_for(variant, amplitude_u),
            v0: ProfileRule::default_for(variant, amplitude_v),
        }
    }

    /// Initial interval `[x_left, x_right]`.
    pub fn interval(&self, variant: ProblemVariant) -> (f64, f64) {
        match variant {
            ProblemVariant::Tfb => (-self.h0, self.h0),
            _ => (0.0, self.h0),
        }
    }

    /// Tabulated `(u0, v0)` with the grid spacing of each table.
    fn tables(&self, variant: ProblemVariant) -> [(Vec<f64>, f64); 2] {
        let (xl, xr) = self.interval(variant);
        [&self.u0, &self.v0].map(|rule| {
            let values = rule.tabulate(xl, xr, CLOSED_FORM_SAMPLES);
            let dx = if values.len() > 1 {
                (xr - xl) / (values.len() - 1) as f64
            } else {
                0.0
            };
            (values, dx)
        })
    }

    /// `(||u0||_inf, ||v0||_inf)`.
    pub fn sup_norms(&self, variant: ProblemVariant) -> (f64, f64) {
        let [(u, _), (v, _)] = self.tables(variant);
        (sup_norm(&u), sup_norm(&v))
    }
}

/// Outcome of [`validate_initial_data`]: one entry per violated clause.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.passed() {
            Ok(())
        } else {
            Err(Error::InvalidInitialData(self.violations))
        }
    }
}

/// Check interior positivity and endpoint compatibility of the initial data.
///
/// Endpoint values must not exceed `tol` in magnitude; for NFB the one-sided
/// derivative at `x = 0` must not exceed `tol` either.
pub fn validate_initial_data(
    data: &InitialData,
    variant: ProblemVariant,
    tol: f64,
) -> Result<ValidationReport> {
    if !(data.h0.is_finite() && data.h0 > 0.0) {
        return Err(Error::param("h0", format!("must be positive, got {}", data.h0)));
    }
    let mut report = ValidationReport::default();
    let tables = data.tables(variant);
    for (name, (values, dx)) in ["u0", "v0"].into_iter().zip(tables.iter()) {
        let n = values.len();
        if n == 0 {
            return Err(Error::InvalidInitialData(vec![format!("{name} has no samples")]));
        }
        if n < 3 {
            report
                .violations
                .push(format!("{name} needs at least 3 samples, got {n}"));
            continue;
        }
        if values.iter().any(|v| !v.is_finite()) {
            report.violations.push(format!("{name} has non-finite samples"));
            continue;
        }
        if values[1..n - 1].iter().any(|&v| v <= 0.0) {
            report
                .violations
                .push(format!("{name} positivity in the open interval"));
        }
        let right = values[n - 1];
        let left = values[0];
        match variant {
            ProblemVariant::Dfb => {
                if left.abs() > tol {
                    report.violations.push(format!("{name}(0) = 0 (found {left})"));
                }
                if right.abs() > tol {
                    report.violations.push(format!("{name}(h0) = 0 (found {right})"));
                }
            }
            ProblemVariant::Nfb => {
                let slope = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * dx);
                if slope.abs() > tol {
                    report
                        .violations
                        .push(format!("{name}'(0) = 0 (found {slope})"));
                }
                if right.abs() > tol {
                    report.violations.push(format!("{name}(h0) = 0 (found {right})"));
                }
            }
            ProblemVariant::Tfb => {
                if left.abs() > tol {
                    report.violations.push(format!("{name}(-h0) = 0 (found {left})"));
                }
                if right.abs() > tol {
                    report.violations.push(format!("{name}(h0) = 0 (found {right})"));
                }
            }
        }
    }
    Ok(report)
}

/// Critical habitat length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub value: f64,
    /// Set for TFB, where the NFB constant is applied to the half-width.
    pub heuristic: bool,
}

/// `pi min{sqrt(d/c), 1}` for DFB and half of that for NFB. TFB reuses the
/// NFB value for the half-width and is flagged as heuristic.
pub fn lambda_threshold(params: &ModelParams, variant: ProblemVariant) -> Threshold {
    let base = (params.d / params.c).sqrt().min(1.0);
    match variant {
        ProblemVariant::Dfb => Threshold {
            value: PI * base,
            heuristic: false,
        },
        ProblemVariant::Nfb => Threshold {
            value: PI / 2.0 * base,
            heuristic: false,
        },
        ProblemVariant::Tfb => Threshold {
            value: PI / 2.0 * base,
            heuristic: true,
        },
    }
}

/// Which length factor to use in the NFB explicit bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum NfbMuFormula {
    /// `(pi/2) sqrt(c/d) - h0`, the factor exactly as published.
    #[default]
    AsPrinted,
    /// `(pi/2) sqrt(d/c) - h0`, consistent with the NFB threshold.
    ThresholdConsistent,
}

/// Explicit `mu^0` above which spreading is guaranteed for `h0 < Lambda`.
pub fn mu_explicit_lower_bound(
    params: &ModelParams,
    expansion: &ExpansionParams,
    data: &InitialData,
    variant: ProblemVariant,
) -> Result<f64> {
    mu_explicit_lower_bound_with(params, expansion, data, variant, NfbMuFormula::AsPrinted)
}

pub fn mu_explicit_lower_bound_with(
    params: &ModelParams,
    expansion: &ExpansionParams,
    data: &InitialData,
    variant: ProblemVariant,
    nfb_formula: NfbMuFormula,
) -> Result<f64> {
    let rho = match expansion {
        ExpansionParams::OneSided { rho, .. } => *rho,
        ExpansionParams::TwoSided { .. } => {
            return Err(Error::Precondition(
                "no explicit spreading bound is available for TFB".into(),
            ))
        }
    };
    let lambda = lambda_threshold(params, variant).value;
    let h0 = data.h0;
    if h0 >= lambda {
        return Err(Error::Precondition(format!(
            "h0 = {h0} must lie below the threshold {lambda}"
        )));
    }
    let [_, (v0, dx)] = data.tables(variant);
    let prefactor = (sup_norm(&v0) / params.c).max(1.0) * params.d / rho;
    let (d, c) = (params.d, params.c);
    let (length_factor, integral) = match variant {
        ProblemVariant::Dfb => {
            let weighted: Vec<f64> = v0
                .iter()
                .enumerate()
                .map(|(i, v)| i as f64 * dx * v)
                .collect();
            (PI * PI * d / c - h0 * h0, 2.0 * trapezoid(&weighted, dx))
        }
        ProblemVariant::Nfb => {
            let ratio = match nfb_formula {
                NfbMuFormula::AsPrinted => (c / d).sqrt(),
                NfbMuFormula::ThresholdConsistent => (d / c).sqrt(),
            };
            (PI / 2.0 * ratio - h0, trapezoid(&v0, dx))
        }
        ProblemVariant::Tfb => unreachable!("rejected above"),
    };
    if !(integral > 0.0) {
        return Err(Error::Precondition(
            "the v0 moment in the explicit bound vanishes".into(),
        ));
    }
    if !(length_factor > 0.0) {
        return Err(Error::Precondition(format!(
            "length factor {length_factor} of the explicit bound is not positive"
        )));
    }
    Ok(prefactor * length_factor / integral)
}

/// `2 max{sqrt(cd), 1}`.
pub fn minimal_wave_speed(params: &ModelParams) -> f64 {
    2.0 * (params.c * params.d).sqrt().max(1.0)
}

/// Exponential decay rates `(lambda1, lambda2)` of the prey and predator
/// wave tails at speed `s`; requires `s` strictly above the minimal speed.
pub fn wave_decay_rates(s: f64, params: &ModelParams) -> Result<(f64, f64)> {
    let s_min = minimal_wave_speed(params);
    if !(s > s_min) {
        return Err(Error::Precondition(format!(
            "wave speed {s} must exceed the minimal speed {s_min}"
        )));
    }
    let (c, d) = (params.c, params.d);
    let lambda1 = (s + (s * s - 4.0).sqrt()) / 2.0;
    let lambda2 = (s + (s * s - 4.0 * c * d).sqrt()) / (2.0 * d);
    Ok((lambda1, lambda2))
}

/// Which of the three wave-tail conditions (a), (b), (c) holds.
///
/// They are usually quoted as giving `lambda2 >= lambda1`. Direct evaluation
/// gives the reverse: under (a) or (b) `lambda2 <= lambda1` for every
/// admissible speed, under (c) for speeds close to the minimal one. That
/// direction is the one that bounds the predator wave below by a multiple of
/// the prey wave.
pub fn wave_tail_clause(params: &ModelParams) -> Option<char> {
    let (c, d) = (params.c, params.d);
    let cd = c * d;
    if d >= 1.0 && cd >= 1.0 {
        Some('a')
    } else if d >= 1.0 && cd < 1.0 && c + d >= 2.0 {
        Some('b')
    } else if d < 1.0 && cd >= 1.0 && 2.0 * cd >= c + d {
        Some('c')
    } else {
        None
    }
}

pub fn wave_tail_condition(params: &ModelParams) -> bool {
    wave_tail_clause(params).is_some()
}

/// Hunting regime driving the long-time limits on the half line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HuntingRegime {
    /// `ac < 1` and `ab < 1`.
    WeaklyHunting,
    /// `ac >= 1`.
    StronglyHunting,
    /// `ac < 1 <= ab`: no prediction.
    Indeterminate,
}

pub fn hunting_regime(params: &ModelParams) -> HuntingRegime {
    let ac = params.a * params.c;
    let ab = params.a * params.b;
    if ac >= 1.0 {
        HuntingRegime::StronglyHunting
    } else if ab < 1.0 {
        HuntingRegime::WeaklyHunting
    } else {
        HuntingRegime::Indeterminate
    }
}

/// Predicted long-time limits of `(u, v)` on compact sets (NFB, spreading).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoexistenceLimits {
    pub regime: HuntingRegime,
    /// `None` in the indeterminate regime.
    pub limits: Option<(f64, f64)>,
}

pub fn coexistence_limits(params: &ModelParams) -> CoexistenceLimits {
    let regime = hunting_regime(params);
    let ModelParams { a, b, c, .. } = *params;
    let limits = match regime {
        HuntingRegime::WeaklyHunting => Some(((1.0 - a * c) / (1.0 + a * b), (b + c) / (1.0 + a * b))),
        HuntingRegime::StronglyHunting => Some((0.0, c)),
        HuntingRegime::Indeterminate => None,
    };
    CoexistenceLimits { regime, limits }
}

/// `a (b + c) < 1`, the hypothesis of the DFB sandwich bounds.
pub fn dfb_sandwich_condition(params: &ModelParams) -> bool {
    params.a * (params.b + params.c) < 1.0
}

/// Global bounds `(M_u, M_v)` used as runtime invariants:
/// `M_u = max{1, ||u0||}`, `M_v = max{c + b M_u, ||v0||}`.
pub fn solution_bounds(params: &ModelParams, data: &InitialData, variant: ProblemVariant) -> (f64, f64) {
    let (su, sv) = data.sup_norms(variant);
    let m_u = su.max(1.0);
    let m_v = (params.c + params.b * m_u).max(sv);
    (m_u, m_v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn params(a: f64, b: f64, c: f64, d: f64) -> ModelParams {
        ModelParams::new(a, b, c, d).unwrap()
    }

    #[test]
    fn rejects_nonpositive_params() {
        assert!(ModelParams::new(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(ModelParams::new(1.0, 1.0, f64::NAN, 1.0).is_err());
        assert!(ExpansionParams::one_sided(1.0, -1.0).is_err());
    }

    #[test]
    fn validation_examples() {
        let dfb = InitialData::standard(ProblemVariant::Dfb, 1.0, 1.0, 1.0);
        assert!(validate_initial_data(&dfb, ProblemVariant::Dfb, 1e-9).unwrap().passed());

        let nfb = InitialData::standard(ProblemVariant::Nfb, 1.0, 1.0, 1.0);
        assert!(validate_initial_data(&nfb, ProblemVariant::Nfb, 1e-6).unwrap().passed());

        let bad = InitialData {
            h0: 1.0,
            u0: ProfileRule::Sine { amplitude: 1.0 },
            v0: ProfileRule::Samples { values: vec![0.5; 9] },
        };
        let report = validate_initial_data(&bad, ProblemVariant::Dfb, 1e-9).unwrap();
        assert_eq!(report.violations.len(), 2, "{:?}", report.violations);
        assert!(report.violations[0].starts_with("v0(0) = 0"));
        assert!(report.violations[1].starts_with("v0(h0) = 0"));
    }

    #[test]
    fn validation_rejects_empty_and_short_profiles() {
        let empty = InitialData {
            h0: 1.0,
            u0: ProfileRule::Samples { values: vec![] },
            v0: ProfileRule::Sine { amplitude: 1.0 },
        };
        assert!(validate_initial_data(&empty, ProblemVariant::Dfb, 1e-9).is_err());

        let short = InitialData {
            h0: 1.0,
            u0: ProfileRule::Samples { values: vec![0.0, 0.0] },
            v0: ProfileRule::Sine { amplitude: 1.0 },
        };
        let report = validate_initial_data(&short, ProblemVariant::Dfb, 1e-9).unwrap();
        assert!(!report.passed());
    }

    #[test]
    fn nfb_slope_clause_is_checked() {
        // sin vanishes at h0 but has slope pi at the Neumann end.
        let data = InitialData {
            h0: 1.0,
            u0: ProfileRule::Sine { amplitude: 1.0 },
            v0: ProfileRule::HalfCosine { amplitude: 1.0 },
        };
        let report = validate_initial_data(&data, ProblemVariant::Nfb, 1e-6).unwrap();
        assert_eq!(report.violations.len(), 1);
        assert!(report.violations[0].starts_with("u0'(0) = 0"));
    }

    #[test]
    fn tfb_interval_is_symmetric() {
        let data = InitialData::standard(ProblemVariant::Tfb, 2.0, 1.0, 1.0);
        assert_eq!(data.interval(ProblemVariant::Tfb), (-2.0, 2.0));
        assert!(validate_initial_data(&data, ProblemVariant::Tfb, 1e-9).unwrap().passed());
        assert_abs_diff_eq!(data.u0.eval(-2.0, 2.0, 0.0), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn lambda_examples() {
        assert_eq!(lambda_threshold(&params(1.0, 1.0, 1.0, 1.0), ProblemVariant::Dfb).value, PI);
        assert_abs_diff_eq!(
            lambda_threshold(&params(1.0, 1.0, 4.0, 1.0), ProblemVariant::Nfb).value,
            PI / 4.0
        );
        assert_eq!(lambda_threshold(&params(1.0, 1.0, 1.0, 9.0), ProblemVariant::Dfb).value, PI);
        let tfb = lambda_threshold(&params(1.0, 1.0, 1.0, 1.0), ProblemVariant::Tfb);
        assert!(tfb.heuristic);
        assert_eq!(tfb.value, PI / 2.0);
    }

    #[test]
    fn mu0_dfb_examples() {
        let p = params(0.5, 0.5, 1.0, 1.0);
        let data = InitialData::standard(ProblemVariant::Dfb, 1.0, 1.0, 1.0);
        let mu0 = mu_explicit_lower_bound(
            &p,
            &ExpansionParams::one_sided(1.0, 1.0).unwrap(),
            &data,
            ProblemVariant::Dfb,
        )
        .unwrap();
        // Oracle: int_0^1 x sin(pi x) dx = 1/pi, so mu0 = pi (pi^2 - 1) / 2.
        let expected = PI * (PI * PI - 1.0) / 2.0;
        assert_abs_diff_eq!(mu0, expected, epsilon = 1e-4);
        assert_abs_diff_eq!(mu0, 13.93, epsilon = 5e-3);

        let mu0_rho2 = mu_explicit_lower_bound(
            &p,
            &ExpansionParams::one_sided(1.0, 2.0).unwrap(),
            &data,
            ProblemVariant::Dfb,
        )
        .unwrap();
        assert_abs_diff_eq!(mu0_rho2, mu0 / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn mu0_vanishes_towards_threshold() {
        let p = params(0.5, 0.5, 1.0, 1.0);
        let e = ExpansionParams::one_sided(1.0, 1.0).unwrap();
        let mut last = f64::INFINITY;
        for h0 in [1.0, 2.0, 3.0, 3.1, PI - 1e-3] {
            let data = InitialData::standard(ProblemVariant::Dfb, h0, 1.0, 1.0);
            let mu0 = mu_explicit_lower_bound(&p, &e, &data, ProblemVariant::Dfb).unwrap();
            assert!(mu0 < last);
            last = mu0;
        }
        assert!(last < 0.01);
        let at = InitialData::standard(ProblemVariant::Dfb, PI, 1.0, 1.0);
        assert!(mu_explicit_lower_bound(&p, &e, &at, ProblemVariant::Dfb).is_err());
    }

    #[test]
    fn mu0_nfb_formula_variants() {
        let e = ExpansionParams::one_sided(1.0, 1.0).unwrap();
        // c = d: both factors coincide.
        let p = params(0.5, 0.5, 1.0, 1.0);
        let data = InitialData::standard(ProblemVariant::Nfb, 1.0, 1.0, 1.0);
        let printed = mu_explicit_lower_bound(&p, &e, &data, ProblemVariant::Nfb).unwrap();
        let consistent = mu_explicit_lower_bound_with(
            &p,
            &e,
            &data,
            ProblemVariant::Nfb,
            NfbMuFormula::ThresholdConsistent,
        )
        .unwrap();
        assert_abs_diff_eq!(printed, consistent, epsilon = 1e-12);
        // int_0^1 cos(pi x/2) = 2/pi
        assert_abs_diff_eq!(printed, (PI / 2.0 - 1.0) / (2.0 / PI), epsilon = 1e-6);

        // c = 0.25, d = 1: Lambda = pi/2; the printed factor pi/4 - 1 < 0.
        let p = params(0.5, 0.5, 0.25, 1.0);
        let data = InitialData::standard(ProblemVariant::Nfb, 1.0, 1.0, 1.0);
        assert!(mu_explicit_lower_bound(&p, &e, &data, ProblemVariant::Nfb).is_err());
        assert!(mu_explicit_lower_bound_with(
            &p,
            &e,
            &data,
            ProblemVariant::Nfb,
            NfbMuFormula::ThresholdConsistent
        )
        .is_ok());
    }

    #[test]
    fn wave_speed_examples() {
        assert_eq!(minimal_wave_speed(&params(1.0, 1.0, 1.0, 1.0)), 2.0);
        assert_eq!(minimal_wave_speed(&params(1.0, 1.0, 4.0, 1.0)), 4.0);
        assert_eq!(minimal_wave_speed(&params(1.0, 1.0, 0.25, 1.0)), 2.0);
    }

    #[test]
    fn decay_rate_examples() {
        let (l1, l2) = wave_decay_rates(2.5, &params(1.0, 1.0, 1.0, 1.0)).unwrap();
        assert_abs_diff_eq!(l1, 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(l2, 2.0, epsilon = 1e-15);

        let (l1, l2) = wave_decay_rates(4.0, &params(1.0, 1.0, 1.0, 2.0)).unwrap();
        assert_abs_diff_eq!(l1, 2.0 + 3f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(l1, 3.7321, epsilon = 1e-4);
        assert_abs_diff_eq!(l2, (4.0 + 8f64.sqrt()) / 4.0, epsilon = 1e-14);
        assert_abs_diff_eq!(l2, 1.7071, epsilon = 1e-4);

        assert!(wave_decay_rates(2.0, &params(1.0, 1.0, 1.0, 1.0)).is_err());
    }

    #[test]
    fn wave_tail_reverse_inequality_fails() {
        // Clause (a) holds, yet lambda2 < lambda1 strictly.
        let p = params(1.0, 1.0, 1.0, 4.0);
        assert_eq!(wave_tail_clause(&p), Some('a'));
        let (l1, l2) = wave_decay_rates(4.4, &p).unwrap();
        assert!(l2 < l1, "l1={l1} l2={l2}");
        // Equality only in the symmetric case.
        let (l1, l2) = wave_decay_rates(2.5, &params(1.0, 1.0, 1.0, 1.0)).unwrap();
        assert_eq!(l1, l2);
    }

    #[test]
    fn wave_tail_examples() {
        assert_eq!(wave_tail_clause(&params(1.0, 1.0, 1.0, 1.0)), Some('a'));
        assert_eq!(wave_tail_clause(&params(1.0, 1.0, 2.0, 0.8)), Some('c'));
        assert!(!wave_tail_condition(&params(1.0, 1.0, 3.0, 0.5)));
        assert_eq!(wave_tail_clause(&params(1.0, 1.0, 0.5, 1.5)), Some('b'));
    }

    #[test]
    fn coexistence_examples() {
        let lim = coexistence_limits(&params(0.5, 0.5, 0.5, 1.0));
        assert_eq!(lim.regime, HuntingRegime::WeaklyHunting);
        let (u, v) = lim.limits.unwrap();
        assert_abs_diff_eq!(u, 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(v, 0.8, epsilon = 1e-15);

        let lim = coexistence_limits(&params(2.0, 0.3, 1.0, 1.0));
        assert_eq!(lim.regime, HuntingRegime::StronglyHunting);
        assert_eq!(lim.limits, Some((0.0, 1.0)));

        let lim = coexistence_limits(&params(1.5, 0.5, 0.5, 1.0));
        assert_eq!(lim.regime, HuntingRegime::WeaklyHunting);
        let (u, v) = lim.limits.unwrap();
        assert_abs_diff_eq!(u, 0.25 / 1.75, epsilon = 1e-15);
        assert_abs_diff_eq!(v, 1.0 / 1.75, epsilon = 1e-15);
        assert_abs_diff_eq!(u, 0.1429, epsilon = 1e-4);

        let lim = coexistence_limits(&params(0.5, 4.0, 0.5, 1.0));
        assert_eq!(lim.regime, HuntingRegime::Indeterminate);
        assert!(lim.limits.is_none());
    }

    #[test]
    fn sandwich_condition_examples() {
        assert!(dfb_sandwich_condition(&params(0.5, 0.5, 0.5, 1.0)));
        assert!(!dfb_sandwich_condition(&params(1.0, 1.0, 1.0, 1.0)));
        assert!(dfb_sandwich_condition(&params(0.9, 0.1, 1.0, 1.0)));
    }

    #[test]
    fn solution_bounds_follow_comparison_constants() {
        let p = params(0.5, 0.5, 1.0, 1.0);
        let data = InitialData::standard(ProblemVariant::Dfb, 1.0, 2.0, 0.5);
        let (mu, mv) = solution_bounds(&p, &data, ProblemVariant::Dfb);
        assert_abs_diff_eq!(mu, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(mv, 2.0, epsilon = 1e-12);
    }

    fn positive() -> impl Strategy<Value = f64> {
        (1e-2f64..1e2).prop_map(|x| x)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn predator_tail_decays_no_faster_under_wave_tail_condition(
            c in positive(), d in positive(), frac in 0.0f64..1.0
        ) {
            let p = params(1.0, 1.0, c, d);
            prop_assume!(wave_tail_condition(&p));
            let s_min = minimal_wave_speed(&p);
            // (a), (b): all of (s_min, 4 s_min]; (c): just above s_min.
            let spread = if wave_tail_clause(&p) == Some('c') { 1e-9 } else { 3.0 };
            let s = s_min * (1.0 + spread * frac).max(1.0 + 1e-12);
            let (l1, l2) = wave_decay_rates(s, &p).unwrap();
            prop_assert!(l1 > 0.0 && l2 > 0.0);
            prop_assert!(l2 <= l1 * (1.0 + 1e-6), "s={s} l1={l1} l2={l2}");
        }

        #[test]
        fn lambda_is_monotone_and_capped(
            c in positive(), d in positive(), k in 1.0f64..10.0
        ) {
            for variant in [ProblemVariant::Dfb, ProblemVariant::Nfb] {
                let base = lambda_threshold(&params(1.0, 1.0, c, d), variant).value;
                let more_c = lambda_threshold(&params(1.0, 1.0, c * k, d), variant).value;
                let more_d = lambda_threshold(&params(1.0, 1.0, c, d * k), variant).value;
                prop_assert!(more_c <= base);
                prop_assert!(more_d >= base);
                let cap = if variant == ProblemVariant::Dfb { PI } else { PI / 2.0 };
                prop_assert!(base <= cap);
            }
        }

        #[test]
        fn weak_hunting_limits_are_interior(
            a in 1e-3f64..1.0, b in 1e-3f64..1.0, c in 1e-3f64..1.0
        ) {
            let p = params(a, b, c, 1.0);
            let lim = coexistence_limits(&p);
            if let (HuntingRegime::WeaklyHunting, Some((u, v))) = (lim.regime, lim.limits) {
                prop_assert!(u > 0.0 && u < 1.0);
                prop_assert!(v > 0.0 && v <= b + c);
            }
        }

        #[test]
        fn mu0_scales_inversely_with_rho_and_linearly_with_d_prefactor(
            rho in 0.1f64..10.0, h0 in 0.1f64..1.0
        ) {
            // c = d = 1 so Lambda = pi and d enters only through the prefactor.
            let p = params(0.5, 0.5, 1.0, 1.0);
            let data = InitialData::standard(ProblemVariant::Dfb, h0, 1.0, 1.0);
            let one = mu_explicit_lower_bound(
                &p, &ExpansionParams::one_sided(1.0, 1.0).unwrap(), &data, ProblemVariant::Dfb
            ).unwrap();
            let scaled = mu_explicit_lower_bound(
                &p, &ExpansionParams::one_sided(1.0, rho).unwrap(), &data, ProblemVariant::Dfb
            ).unwrap();
            prop_assert!((scaled * rho - one).abs() <= 1e-12 * one);

            let p2 = params(0.5, 0.5, 2.0, 2.0);
            let doubled_d = mu_explicit_lower_bound(
                &p2, &ExpansionParams::one_sided(1.0, 1.0).unwrap(), &data, ProblemVariant::Dfb
            ).unwrap();
            // d/c fixed: prefactor max{1, ||v0||/c} d doubles from 1 to 2.
            prop_assert!((doubled_d - 2.0 * one).abs() <= 1e-12 * one);
        }
    }
}
