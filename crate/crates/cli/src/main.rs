mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::{info, warn};
use serde::Serialize;
use serde_json::json;
use stefanpp_core::analysis::{bisect_mu_star, classify, estimate_speed, BisectConfig};
use stefanpp_core::model::{lambda_threshold, minimal_wave_speed, mu_explicit_lower_bound, wave_tail_clause};
use stefanpp_core::parallel::{configure_threads, Execution};
use stefanpp_core::solver::{run, write_snapshots_csv, write_trajectory_csv, Termination};
use stefanpp_core::stationary::solve_coupled_stationary;
use stefanpp_core::verify::{run_suite, verify_spec, Suite, VerifyReport};
use stefanpp_core::Error;

use crate::config::{LoadedConfig, RunConfig};
use crate::output::{write_atomic, write_columns, write_json};

#[derive(Parser)]
#[command(name = "stefanpp", version, about = "Free-boundary prey-predator simulations and checks")]
struct Cli {
    /// Seed for every randomized component.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (overrides STEFANPP_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Run batches one job at a time.
    #[arg(long, global = true)]
    sequential: bool,
    /// More log output (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run configuration.
    config: PathBuf,
    /// Output directory.
    #[arg(short, long, default_value = ".")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation; writes trajectory.csv, snapshots.csv, outcome.json.
    Simulate(Common),
    /// Bisect the critical expansion coefficient; writes mustar.json.
    Threshold {
        #[command(flatten)]
        common: Common,
        /// Lower seed (expected to vanish).
        #[arg(long, default_value_t = 0.01)]
        mu_lo: f64,
        /// Upper seed (expected to spread); defaults to the explicit bound when available.
        #[arg(long)]
        mu_hi: Option<f64>,
        #[arg(long, default_value_t = 12)]
        iters: usize,
        /// Probe horizon; defaults to the config's t_max.
        #[arg(long)]
        t_max: Option<f64>,
    },
    /// Fit the late-time front speed; writes speed.json.
    Speed {
        #[command(flatten)]
        common: Common,
        /// Start of the fit window as a fraction of t_max.
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Stationary bound profiles and coupled solution on the half line.
    Stationary {
        #[command(flatten)]
        common: Common,
        /// Truncation length.
        #[arg(long, default_value_t = 40.0)]
        length: f64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Run a benchmark suite, or the checks for one config; prints a table.
    Verify {
        /// Check this config instead of a named suite.
        config: Option<PathBuf>,
        #[arg(long, default_value = "quick")]
        suite: Suite,
        /// Write verify.json here.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let threads = configure_threads(cli.threads);
    info!("using {threads} worker threads");
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: &Cli) -> Result<()> {
    let execution = if cli.sequential { Execution::Sequential } else { Execution::Parallel };
    match &cli.command {
        Command::Simulate(c) => simulate(c, cli.seed),
        Command::Threshold {
            common,
            mu_lo,
            mu_hi,
            iters,
            t_max,
        } => threshold(common, *mu_lo, *mu_hi, *iters, *t_max, execution),
        Command::Speed { common, alpha } => speed(common, *alpha),
        Command::Stationary { common, length, tol } => stationary(common, *length, *tol),
        Command::Verify { config, suite, out } => verify(config.as_deref(), *suite, out.as_deref(), cli.seed, execution),
    }
}

fn simulate(c: &Common, seed: u64) -> Result<()> {
    let loaded = RunConfig::load(&c.config)?;
    let spec = loaded.to_spec()?;
    let settings = loaded.config.analysis_settings();
    let traj = run(&spec)?;
    write_atomic(&c.out.join("trajectory.csv"), |w| Ok(write_trajectory_csv(w, &traj)?))?;
    write_atomic(&c.out.join("snapshots.csv"), |w| Ok(write_snapshots_csv(w, &traj.snapshots)?))?;
    let outcome = classify(&traj, &spec.params, spec.variant, settings.classify);
    let last = traj.last();
    write_json(
        &c.out.join("outcome.json"),
        &json!({
            "verdict": outcome.verdict,
            "outcome": outcome,
            "termination": traj.termination,
            "steps": traj.steps,
            "clamp_count": traj.clamp_count,
            "dt_halvings": traj.dt_halvings,
            "violation_count": traj.violation_count,
            "invariant_violations": traj.invariant_violations,
            "final": { "t": last.t, "g": last.g, "h": last.h, "sup_u": last.sup_u, "sup_v": last.sup_v },
            "seed": seed,
            "spec": loaded.config,
        }),
    )?;
    println!(
        "{:?} (t = {:.6}, h = {:.6}, {} steps)",
        outcome.verdict, last.t, last.h, traj.steps
    );
    if let Termination::StepFailure { t, reason } = &traj.termination {
        bail!("step failure at t = {t}: {reason}");
    }
    Ok(())
}

#[derive(Serialize)]
struct ProbeRow {
    mu: f64,
    verdict: stefanpp_core::analysis::Verdict,
    t_max: f64,
    fallback: bool,
    invariant_violations: usize,
}

fn probe_rows(probes: &[stefanpp_core::analysis::Probe]) -> Vec<ProbeRow> {
    probes
        .iter()
        .map(|p| ProbeRow {
            mu: p.mu,
            verdict: p.verdict,
            t_max: p.t_max,
            fallback: p.fallback,
            invariant_violations: p.invariant_violations,
        })
        .collect()
}

fn threshold(
    c: &Common,
    mu_lo: f64,
    mu_hi: Option<f64>,
    iters: usize,
    t_max: Option<f64>,
    execution: Execution,
) -> Result<()> {
    let loaded = RunConfig::load(&c.config)?;
    let spec = loaded.to_spec()?;
    let mu0 = mu_explicit_lower_bound(&spec.params, &spec.expansion, &spec.initial, spec.variant).ok();
    let mu_hi = match (mu_hi, mu0) {
        (Some(m), _) => m,
        (None, Some(m)) => m,
        (None, None) => bail!("no explicit bound for this problem; pass --mu-hi"),
    };
    let mut cfg = BisectConfig::new(iters, t_max.unwrap_or(spec.numerics.t_max));
    cfg.probe.classify = loaded.config.analysis_settings().classify;
    cfg.execution = execution;
    let path = c.out.join("mustar.json");
    match bisect_mu_star(&spec, mu_lo, mu_hi, &cfg) {
        Ok(est) => {
            for w in &est.warnings {
                warn!("{w}");
            }
            write_json(
                &path,
                &json!({
                    "mu_lo": est.mu_lo,
                    "mu_hi": est.mu_hi,
                    "midpoint": est.midpoint(),
                    "width": est.width(),
                    "seeds": est.seeds,
                    "iterations": est.iterations,
                    "explicit_bound": mu0,
                    "warnings": est.warnings,
                    "probes": probe_rows(&est.probes),
                    "spec": loaded.config,
                }),
            )?;
            println!("mu* in [{:.6}, {:.6}]", est.mu_lo, est.mu_hi);
            Ok(())
        }
        Err(Error::NonMonotoneProbes(probes)) => {
            let n = probes.len();
            write_json(
                &path,
                &json!({
                    "error": "non-monotone verdicts",
                    "probes": probe_rows(&probes),
                    "spec": loaded.config,
                }),
            )?;
            bail!("non-monotone verdict pattern across {n} probes");
        }
        Err(e) => Err(e.into()),
    }
}

fn speed(c: &Common, alpha: Option<f64>) -> Result<()> {
    let loaded = RunConfig::load(&c.config)?;
    let spec = loaded.to_spec()?;
    let settings = loaded.config.analysis_settings();
    let traj = run(&spec)?;
    if let Termination::StepFailure { t, reason } = &traj.termination {
        bail!("step failure at t = {t}: {reason}");
    }
    let est = estimate_speed(&traj, &spec.params, spec.variant, alpha.unwrap_or(settings.alpha), settings.classify)?;
    let clause = wave_tail_clause(&spec.params);
    if clause.is_none() {
        warn!("wave-tail conditions fail for these parameters; the bound is not guaranteed");
    }
    write_json(
        &c.out.join("speed.json"),
        &json!({
            "slope": est.slope(),
            "fit": est.fit,
            "window": est.window,
            "window_records": est.window_records,
            "bound": est.bound,
            "satisfied": est.satisfied,
            "margin": est.margin,
            "tail_condition": clause.map(String::from),
            "spec": loaded.config,
        }),
    )?;
    println!(
        "slope {:.6} vs bound {:.6}: {}",
        est.slope(),
        est.bound,
        if est.satisfied { "satisfied" } else { "exceeded" }
    );
    Ok(())
}

fn stationary(c: &Common, length: f64, tol: f64) -> Result<()> {
    let loaded = RunConfig::load(&c.config)?;
    let params = loaded.config.params();
    let sol = solve_coupled_stationary(&params, length, tol)?;
    let b = &sol.bounds;
    write_columns(
        &c.out.join("stationary_bounds.csv"),
        &["x", "ubar", "vbar", "ulow", "vlow"],
        &[&b.x, &b.ubar, &b.vbar, &b.ulow, &b.vlow],
    )?;
    write_columns(&c.out.join("stationary_solution.csv"), &["x", "u", "v"], &[&sol.x, &sol.u, &sol.v])?;
    write_json(
        &c.out.join("stationary.json"),
        &json!({
            "length": length,
            "residual_sup": sol.residual_sup,
            "gap": sol.gap,
            "iterations": sol.iterations,
            "far_field_expected": b.far_field_expected,
            "far_field_observed": b.far_field_observed,
            "spec": loaded.config,
        }),
    )?;
    println!(
        "residual {:.3e}, gap {:.3e} after {} iterations",
        sol.residual_sup, sol.gap, sol.iterations
    );
    Ok(())
}

fn verify(config: Option<&Path>, suite: Suite, out: Option<&Path>, seed: u64, execution: Execution) -> Result<()> {
    let report: VerifyReport = match config {
        Some(path) => {
            let loaded: LoadedConfig = RunConfig::load(path)?;
            let spec = loaded.to_spec()?;
            let lambda = lambda_threshold(&spec.params, spec.variant);
            info!(
                "threshold {:.6}{}, minimal wave speed {:.6}",
                lambda.value,
                if lambda.heuristic { " (heuristic)" } else { "" },
                minimal_wave_speed(&spec.params)
            );
            verify_spec(&spec, &loaded.config.analysis_settings(), execution)?
        }
        None => run_suite(suite, seed, execution),
    };
    print!("{}", report.table());
    if let Some(dir) = out {
        write_json(&dir.join("verify.json"), &report).context("writing verify report")?;
    }
    if !report.passed {
        bail!("{} of {} checks failed", report.checks.iter().filter(|c| !c.passed).count(), report.checks.len());
    }
    Ok(())
}
