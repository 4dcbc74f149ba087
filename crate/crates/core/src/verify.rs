//! Benchmark suites checking the qualitative and quantitative predictions
//! end to end, plus the same harness applied to a single user spec.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    bisect_mu_star, check_longtime_limits, check_with_band, classify, comparison_harness, estimate_speed,
    BisectConfig, ClassifyConfig, Classifier, ComparisonConfig, Verdict,
};
use crate::error::{Error, Result};
use crate::model::{
    lambda_threshold, minimal_wave_speed, mu_explicit_lower_bound, wave_tail_condition, ExpansionParams,
    ModelParams, ProblemVariant,
};
use crate::parallel::{self, Execution};
use crate::solver::{run, run_with, NumericsConfig, ProblemSpec, Trajectory};
use crate::stationary::{cells_for, solve_coupled_stationary, solve_scalar_bvp, uniform_nodes, RightBc, ScalarBvpSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suite: String,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl VerifyReport {
    fn new(suite: String, seed: u64, checks: Vec<Check>) -> Self {
        let passed = checks.iter().all(|c| c.passed);
        Self {
            suite,
            seed,
            checks,
            passed,
        }
    }

    /// Fixed-width pass/fail table.
    pub fn table(&self) -> String {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(5).max(5);
        let mut out = format!("{:<width$}  result  detail\n", "check");
        for c in &self.checks {
            let mark = if c.passed { "PASS" } else { "FAIL" };
            out.push_str(&format!("{:<width$}  {mark:<6}  {}\n", c.name, c.detail));
        }
        let total = self.checks.len();
        let ok = self.checks.iter().filter(|c| c.passed).count();
        out.push_str(&format!("{ok}/{total} checks passed\n"));
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Suite {
    /// Reduced horizons and grids; seconds.
    Quick,
    /// Acceptance-scale horizons and grids; minutes.
    Full,
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::Quick => "quick",
            Suite::Full => "full",
        })
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "quick" => Ok(Suite::Quick),
            "full" => Ok(Suite::Full),
            other => Err(Error::param("suite", format!("expected quick or full, got {other}"))),
        }
    }
}

type Outcome = std::result::Result<String, String>;

fn check(name: &str, outcome: Outcome) -> Check {
    let (passed, detail) = match outcome {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    Check {
        name: name.to_string(),
        passed,
        detail,
    }
}

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

#[derive(Debug, Clone, Copy)]
struct Scale {
    n_cells: usize,
    horizon: f64,
    speed_horizon: f64,
    elliptic_cases: usize,
    harness_horizon: f64,
}

impl Scale {
    fn of(suite: Suite) -> Self {
        match suite {
            Suite::Quick => Self {
                n_cells: 64,
                horizon: 80.0,
                speed_horizon: 40.0,
                elliptic_cases: 20,
                harness_horizon: 5.0,
            },
            Suite::Full => Self {
                n_cells: 128,
                horizon: 150.0,
                speed_horizon: 80.0,
                elliptic_cases: 200,
                harness_horizon: 40.0,
            },
        }
    }
}

fn one_sided(
    variant: ProblemVariant,
    (a, b, c, d): (f64, f64, f64, f64),
    mu: f64,
    h0: f64,
    n_cells: usize,
    t_max: f64,
) -> ProblemSpec {
    ProblemSpec::standard(
        variant,
        ModelParams { a, b, c, d },
        ExpansionParams::OneSided { mu, rho: 1.0 },
        h0,
        NumericsConfig {
            n_cells,
            t_max,
            ..NumericsConfig::default()
        },
    )
}

fn run_checked(spec: &ProblemSpec) -> std::result::Result<Trajectory, String> {
    let traj = run(spec).map_err(|e| e.to_string())?;
    if traj.failed() {
        return Err(format!("{:?}", traj.termination));
    }
    if traj.violation_count > 0 {
        return Err(format!("invariant violations: {:?}", traj.invariant_violations));
    }
    Ok(traj)
}

fn dfb_benchmark(mu: f64, n_cells: usize, t_max: f64) -> ProblemSpec {
    one_sided(ProblemVariant::Dfb, (0.5, 0.5, 1.0, 1.0), mu, 1.0, n_cells, t_max)
}

fn benchmark_mu0() -> Result<f64> {
    let spec = dfb_benchmark(1.0, 64, 1.0);
    mu_explicit_lower_bound(&spec.params, &spec.expansion, &spec.initial, spec.variant)
}

fn threshold_constants() -> Outcome {
    let p = |c: f64, d: f64| ModelParams { a: 1.0, b: 1.0, c, d };
    let lam_dfb = lambda_threshold(&p(1.0, 1.0), ProblemVariant::Dfb).value;
    let lam_nfb = lambda_threshold(&p(4.0, 1.0), ProblemVariant::Nfb).value;
    let s_min = minimal_wave_speed(&p(4.0, 1.0));
    let mu0 = benchmark_mu0().map_err(|e| e.to_string())?;
    let mu0_exact = PI * (PI * PI - 1.0) / 2.0;
    let ok = lam_dfb == PI && lam_nfb == PI / 4.0 && s_min == 4.0 && ((mu0 - mu0_exact) / mu0_exact).abs() < 1e-4;
    verdict(ok, format!("Lambda = {lam_dfb}, {lam_nfb}; s_min = {s_min}; mu0 = {mu0:.6}"))
}

fn spreading_above_threshold(scale: Scale) -> Outcome {
    let spec = one_sided(ProblemVariant::Dfb, (0.5, 0.5, 1.0, 1.0), 1.0, 4.0, scale.n_cells, 2.0);
    let traj = run_checked(&spec)?;
    let out = classify(&traj, &spec.params, spec.variant, ClassifyConfig::default());
    verdict(
        out.verdict == Verdict::Spreading && traj.last().h > 4.0,
        format!("{:?} at t = {}, h(T) = {:.4}", out.verdict, out.evidence.t, traj.last().h),
    )
}

fn early_classified(spec: &ProblemSpec) -> std::result::Result<(Trajectory, crate::analysis::Outcome), String> {
    let classifier = Classifier::new(&spec.params, spec.variant, ClassifyConfig::default());
    let traj = run_with(spec, classifier.observer()).map_err(|e| e.to_string())?;
    if traj.failed() {
        return Err(format!("{:?}", traj.termination));
    }
    if traj.violation_count > 0 {
        return Err(format!("invariant violations: {:?}", traj.invariant_violations));
    }
    let out = classifier.classify(&traj);
    Ok((traj, out))
}

fn vanishing_small_mu(scale: Scale) -> Outcome {
    let spec = dfb_benchmark(1e-3, scale.n_cells, 200.0);
    let (traj, out) = early_classified(&spec)?;
    let last = traj.last();
    let mass = last.sup_u + last.sup_v;
    verdict(
        out.verdict == Verdict::Vanishing && mass < 1e-4 && last.h < out.lambda,
        format!("{:?} at t = {:.3}, mass = {mass:.2e}, h = {:.5}", out.verdict, last.t, last.h),
    )
}

fn explicit_mu_spreads(scale: Scale) -> Outcome {
    let mu0 = benchmark_mu0().map_err(|e| e.to_string())?;
    let spec = dfb_benchmark(1.05 * mu0, scale.n_cells, 100.0);
    let (_, out) = early_classified(&spec)?;
    verdict(
        out.verdict == Verdict::Spreading,
        format!("mu = {:.4}: {:?} at t = {:.3}", 1.05 * mu0, out.verdict, out.evidence.t),
    )
}

fn bisection(scale: Scale, execution: Execution) -> Outcome {
    let mu0 = benchmark_mu0().map_err(|e| e.to_string())?;
    let spec = dfb_benchmark(1.0, scale.n_cells, 100.0);
    let mut config = BisectConfig::new(12, 100.0);
    config.execution = execution;
    let est = bisect_mu_star(&spec, 0.1, mu0, &config).map_err(|e| e.to_string())?;
    let rel = est.width() / est.midpoint();
    verdict(
        rel <= 0.01 && est.mu_lo > 0.0 && est.mu_hi < mu0,
        format!("[{:.5}, {:.5}], width/mid = {rel:.2e}, {} warnings", est.mu_lo, est.mu_hi, est.warnings.len()),
    )
}

fn front_ordering(scale: Scale, execution: Execution) -> Outcome {
    let spec = one_sided(ProblemVariant::Nfb, (0.5, 0.5, 0.5, 1.0), 1.0, 1.0, scale.n_cells, scale.harness_horizon);
    let config = ComparisonConfig {
        execution,
        ..ComparisonConfig::default()
    };
    let rep = comparison_harness(&spec, &config).map_err(|e| e.to_string())?;
    let f = rep.final_fronts;
    verdict(
        rep.passed && rep.invariant_violations == 0,
        format!("p = {:.4} <= h = {:.4} <= g = {:.4} over {} times", f.lower, f.coupled, f.upper, rep.lower.times_checked),
    )
}

fn speed_bound(scale: Scale, execution: Execution) -> Outcome {
    let cases = [(1.0, 1.0), (2.0, 1.0), (1.0, 2.0)];
    let results = parallel::map(execution, &cases, |&(c, d)| {
        let spec = one_sided(ProblemVariant::Nfb, (0.5, 0.5, c, d), 2.0, 4.0, scale.n_cells, scale.speed_horizon);
        let traj = run_checked(&spec)?;
        let est = estimate_speed(&traj, &spec.params, spec.variant, 0.5, ClassifyConfig::default())
            .map_err(|e| e.to_string())?;
        Ok::<_, String>((c, d, est))
    });
    let mut parts = Vec::new();
    let mut ok = true;
    for r in results {
        let (c, d, est) = r?;
        ok &= est.satisfied && wave_tail_condition(&ModelParams { a: 0.5, b: 0.5, c, d });
        parts.push(format!("c={c},d={d}: {:.3} <= {:.3}", est.slope(), est.bound * 1.05));
    }
    verdict(ok, parts.join("; "))
}

fn coexistence(scale: Scale) -> Outcome {
    let spec = one_sided(ProblemVariant::Nfb, (0.5, 0.5, 0.5, 1.0), 2.0, 4.0, scale.n_cells, scale.horizon);
    let traj = run_checked(&spec)?;
    let rep = check_longtime_limits(&traj, &spec.params, spec.variant, &[1.0], 0.05).map_err(|e| e.to_string())?;
    let p = rep.probes[0];
    verdict(rep.passed == Some(true), format!("x = 1: u = {:.4}, v = {:.4} vs (0.6, 0.8)", p.u, p.v))
}

fn strong_hunting(scale: Scale) -> Outcome {
    let spec = one_sided(ProblemVariant::Nfb, (2.0, 0.5, 1.0, 1.0), 2.0, 4.0, scale.n_cells, scale.horizon);
    let traj = run_checked(&spec)?;
    let rep = check_longtime_limits(&traj, &spec.params, spec.variant, &[1.0], 0.05).map_err(|e| e.to_string())?;
    let p = rep.probes[0];
    verdict(rep.passed == Some(true), format!("x = 1: u = {:.2e}, v = {:.4} vs (0, 1)", p.u, p.v))
}

fn dirichlet_band(scale: Scale) -> Outcome {
    let spec = one_sided(ProblemVariant::Dfb, (0.25, 0.25, 0.25, 1.0), 2.0, 4.0, 2 * scale.n_cells, scale.horizon);
    let traj = run_checked(&spec)?;
    let rep = check_longtime_limits(&traj, &spec.params, spec.variant, &[1.0, 3.0], 0.05).map_err(|e| e.to_string())?;
    let detail = rep
        .probes
        .iter()
        .map(|p| format!("x = {}: u = {:.4} in [{:.4}, {:.4}]", p.x, p.u, p.u_range.0, p.u_range.1))
        .collect::<Vec<_>>()
        .join("; ");
    verdict(rep.passed == Some(true), detail)
}

/// Random piecewise-linear coefficient with `n_knots` knots on `[0, length]`.
fn random_piecewise(rng: &mut ChaCha8Rng, length: f64, n_knots: usize, lo: f64, hi: f64) -> Vec<(f64, f64)> {
    (0..n_knots)
        .map(|k| (length * k as f64 / (n_knots - 1) as f64, rng.gen_range(lo..hi)))
        .collect()
}

fn eval_piecewise(knots: &[(f64, f64)], x: f64) -> f64 {
    let k = knots.partition_point(|&(xk, _)| xk <= x).clamp(1, knots.len() - 1);
    let ((x0, y0), (x1, y1)) = (knots[k - 1], knots[k]);
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

fn elliptic_comparison(scale: Scale, seed: u64, execution: Execution) -> Outcome {
    let length = 10.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cases: Vec<_> = (0..scale.elliptic_cases)
        .map(|_| {
            let f1 = random_piecewise(&mut rng, length, 6, 0.2, 2.0);
            let bump = random_piecewise(&mut rng, length, 6, 0.0, 1.0);
            (f1, bump)
        })
        .collect();
    let nodes = uniform_nodes(length, cells_for(length));
    let results = parallel::map(execution, &cases, |(f1, bump)| {
        let s1: Vec<f64> = nodes.iter().map(|&x| eval_piecewise(f1, x)).collect();
        let s2: Vec<f64> = nodes.iter().zip(&s1).map(|(&x, y)| y + eval_piecewise(bump, x)).collect();
        let k = 1.1 * s2.iter().copied().fold(0.0, f64::max);
        let spec = |f: Vec<f64>| ScalarBvpSpec {
            d: 1.0,
            lambda: 1.0,
            f,
            length,
            right_bc: RightBc::DirichletValue(k),
        };
        let u1 = solve_scalar_bvp(&spec(s1), 1e-12)?;
        let u2 = solve_scalar_bvp(&spec(s2), 1e-12)?;
        Ok::<f64, Error>(u1.values.iter().zip(&u2.values).map(|(a, b)| a - b).fold(f64::NEG_INFINITY, f64::max))
    });
    let mut worst = f64::NEG_INFINITY;
    let mut violations = 0;
    for r in results {
        let excess = r.map_err(|e| e.to_string())?;
        worst = worst.max(excess);
        if excess > 1e-10 {
            violations += 1;
        }
    }
    verdict(
        violations == 0,
        format!("{} cases, {violations} violations, max u1 - u2 = {worst:.2e}", cases.len()),
    )
}

fn stationary_sandwich() -> Outcome {
    let params = ModelParams {
        a: 0.25,
        b: 0.25,
        c: 0.25,
        d: 1.0,
    };
    let sol = solve_coupled_stationary(&params, 40.0, 1e-10).map_err(|e| e.to_string())?;
    let b = &sol.bounds;
    let slack = 1e-8;
    let inside = (0..sol.x.len()).all(|i| {
        sol.u[i] >= b.ulow[i] - slack
            && sol.u[i] <= b.ubar[i] + slack
            && sol.v[i] >= b.vlow[i] - slack
            && sol.v[i] <= b.vbar[i] + slack
    });
    verdict(
        inside && sol.residual_sup < 1e-8,
        format!("sandwich {inside}, residual = {:.2e}", sol.residual_sup),
    )
}

/// Run a named benchmark suite. `seed` drives the randomized elliptic
/// comparison cases.
pub fn run_suite(suite: Suite, seed: u64, execution: Execution) -> VerifyReport {
    let scale = Scale::of(suite);
    type Job = Box<dyn Fn() -> Outcome + Send + Sync>;
    let mut jobs: Vec<(&str, Job)> = vec![
        ("threshold constants", Box::new(threshold_constants)),
        ("spreading above threshold", Box::new(move || spreading_above_threshold(scale))),
        ("vanishing at small mu", Box::new(move || vanishing_small_mu(scale))),
        ("spreading at 1.05 mu0", Box::new(move || explicit_mu_spreads(scale))),
        ("front ordering", Box::new(move || front_ordering(scale, execution))),
        ("speed bound", Box::new(move || speed_bound(scale, execution))),
        ("coexistence limits", Box::new(move || coexistence(scale))),
        ("elliptic comparison", Box::new(move || elliptic_comparison(scale, seed, execution))),
        ("stationary sandwich", Box::new(stationary_sandwich)),
    ];
    if suite == Suite::Full {
        jobs.push(("critical mu bisection", Box::new(move || bisection(scale, execution))));
        jobs.push(("prey extinction limits", Box::new(move || strong_hunting(scale))));
        jobs.push(("dirichlet stationary band", Box::new(move || dirichlet_band(scale))));
    }
    let checks = parallel::map(execution, &jobs, |(name, job)| check(name, job()));
    VerifyReport::new(suite.to_string(), seed, checks)
}

/// Analysis settings applied to a single spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisSettings {
    pub classify: ClassifyConfig,
    pub probe_xs: Vec<f64>,
    /// Start of the speed-fit window as a fraction of the horizon.
    pub alpha: f64,
    /// Tolerance of the long-time limit checks.
    pub limit_tol: f64,
}

impl Default for AnalysisSettings {
    fn default() -> Self {
        Self {
            classify: ClassifyConfig::default(),
            probe_xs: crate::analysis::DEFAULT_PROBES.to_vec(),
            alpha: 0.5,
            limit_tol: 0.05,
        }
    }
}

/// Invariants, classification, speed bound, long-time limits and front
/// ordering for one spec. Checks whose preconditions fail are reported as
/// skipped (passing) with the reason.
pub fn verify_spec(spec: &ProblemSpec, settings: &AnalysisSettings, execution: Execution) -> Result<VerifyReport> {
    spec.validate()?;
    let traj = run(spec)?;
    let mut checks = Vec::new();
    checks.push(check(
        "run completed",
        verdict(!traj.failed(), format!("{:?} after {} steps", traj.termination, traj.steps)),
    ));
    checks.push(check(
        "runtime invariants",
        verdict(
            traj.violation_count == 0,
            match traj.invariant_violations.first() {
                Some(v) => format!("{} violations, first: {v}", traj.violation_count),
                None => format!("{} records clean", traj.records.len()),
            },
        ),
    ));
    let out = classify(&traj, &spec.params, spec.variant, settings.classify);
    let lambda = lambda_threshold(&spec.params, spec.variant).value;
    let consistent = match out.verdict {
        Verdict::Spreading => traj.records.iter().skip_while(|r| r.t < out.evidence.t).all(|r| {
            let extent = if spec.variant == ProblemVariant::Tfb { 0.5 * (r.h - r.g) } else { r.h };
            extent >= lambda
        }),
        Verdict::Vanishing => out.evidence.h < lambda,
        Verdict::Undetermined => true,
    };
    checks.push(check(
        "classification",
        verdict(consistent, format!("{:?} at t = {:.4}, h = {:.4}", out.verdict, out.evidence.t, out.evidence.h)),
    ));

    if out.verdict == Verdict::Spreading && spec.variant != ProblemVariant::Tfb {
        let speed = match estimate_speed(&traj, &spec.params, spec.variant, settings.alpha, settings.classify) {
            Ok(est) if wave_tail_condition(&spec.params) => verdict(
                est.satisfied,
                format!("slope {:.4} vs bound {:.4} (R^2 = {:.4})", est.slope(), est.bound, est.fit.r_squared),
            ),
            Ok(est) => Ok(format!(
                "skipped: wave-tail conditions fail for c = {}, d = {} (slope {:.4})",
                spec.params.c,
                spec.params.d,
                est.slope()
            )),
            Err(e) => Ok(format!("skipped: {e}")),
        };
        checks.push(check("speed bound", speed));

        let band = if spec.variant == ProblemVariant::Dfb && crate::model::dfb_sandwich_condition(&spec.params) {
            Some(crate::stationary::coupled_bounds(&spec.params, crate::analysis::BAND_LENGTH, 1e-6)?)
        } else {
            None
        };
        let rep = check_with_band(&traj, &spec.params, spec.variant, &settings.probe_xs, settings.limit_tol, band.as_ref());
        let detail = rep
            .probes
            .iter()
            .map(|p| format!("x = {}: (u, v) = ({:.4}, {:.4})", p.x, p.u, p.v))
            .collect::<Vec<_>>()
            .join("; ");
        let outcome = match rep.passed {
            Some(ok) => verdict(ok, detail),
            None if !rep.horizon_sufficient => Ok(format!("skipped: horizon too short (h(T) = {:.3})", rep.h_final)),
            None => Ok("skipped: no limit prediction for these parameters".into()),
        };
        checks.push(check("long-time limits", outcome));
    }

    if spec.variant != ProblemVariant::Tfb {
        let config = ComparisonConfig {
            execution,
            ..ComparisonConfig::default()
        };
        let rep = comparison_harness(spec, &config)?;
        let f = rep.final_fronts;
        checks.push(check(
            "front ordering",
            verdict(
                rep.passed,
                format!("p = {:.4} <= h = {:.4} <= g = {:.4}", f.lower, f.coupled, f.upper),
            ),
        ));
    }
    Ok(VerifyReport::new("spec".into(), 0, checks))
}
