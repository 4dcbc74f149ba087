use serde::{Deserialize, Serialize};

use super::classify::{ClassifyConfig, Classifier, Outcome, Verdict};
use crate::error::{Error, Result};
use crate::model::lambda_threshold;
use crate::parallel::{self, Execution};
use crate::solver::{run_with, ProblemSpec, Termination};

/// One classified run at a given `mu`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub mu: f64,
    /// Verdict used by the bisection.
    pub verdict: Verdict,
    pub outcome: Outcome,
    /// Horizon of the run that produced `outcome`.
    pub t_max: f64,
    /// Still undetermined after doubling the horizon; counted as vanishing.
    pub fallback: bool,
    /// Runtime invariant violations in the probe's runs.
    pub invariant_violations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub t_max: f64,
    pub classify: ClassifyConfig,
}

/// Run `spec` with coefficient `mu` until classified.
///
/// An undetermined run is repeated once with twice the horizon; if that is
/// still undetermined the probe counts as vanishing with `fallback` set.
pub fn probe(spec: &ProblemSpec, mu: f64, config: &ProbeConfig) -> Result<Probe> {
    let spec = spec.with_mu(mu);
    let classifier = Classifier::new(&spec.params, spec.variant, config.classify);
    let mut t_max = config.t_max;
    let mut violations = 0;
    for attempt in 0..2 {
        let traj = run_with(&spec.with_t_max(t_max), classifier.observer())?;
        violations += traj.violation_count;
        let outcome = classifier.classify(&traj);
        if let Termination::StepFailure { t, reason } = &traj.termination {
            if outcome.verdict == Verdict::Undetermined {
                return Err(Error::StepFailure {
                    t: *t,
                    reason: format!("probe at mu = {mu}: {reason}"),
                });
            }
        }
        if outcome.verdict != Verdict::Undetermined {
            return Ok(Probe {
                mu,
                verdict: outcome.verdict,
                outcome,
                t_max,
                fallback: false,
                invariant_violations: violations,
            });
        }
        if attempt == 1 {
            log::warn!("mu = {mu} undetermined up to t = {t_max}; counted as vanishing");
            return Ok(Probe {
                mu,
                verdict: Verdict::Vanishing,
                outcome,
                t_max,
                fallback: true,
                invariant_violations: violations,
            });
        }
        t_max *= 2.0;
    }
    unreachable!()
}

/// Probe every `mu` in `mus`, preserving order.
pub fn sweep_mu(spec: &ProblemSpec, mus: &[f64], config: &ProbeConfig, execution: Execution) -> Result<Vec<Probe>> {
    parallel::map(execution, mus, |&mu| probe(spec, mu, config)).into_iter().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BisectConfig {
    pub n_iters: usize,
    pub probe: ProbeConfig,
    /// Seed rescaling factor when a seed has the wrong verdict.
    pub expansion_factor: f64,
    pub max_expansions: usize,
    pub execution: Execution,
}

impl BisectConfig {
    pub fn new(n_iters: usize, t_max: f64) -> Self {
        Self {
            n_iters,
            probe: ProbeConfig {
                t_max,
                classify: ClassifyConfig::default(),
            },
            expansion_factor: 4.0,
            max_expansions: 10,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuStarEstimate {
    /// Largest probed `mu` that vanished.
    pub mu_lo: f64,
    /// Smallest probed `mu` that spread.
    pub mu_hi: f64,
    /// Seeds after any expansion.
    pub seeds: (f64, f64),
    pub iterations: usize,
    /// Every probe, sorted by `mu`.
    pub probes: Vec<Probe>,
    pub warnings: Vec<String>,
    pub template: ProblemSpec,
}

impl MuStarEstimate {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.mu_lo + self.mu_hi)
    }

    pub fn width(&self) -> f64 {
        self.mu_hi - self.mu_lo
    }
}

/// Locate the critical expansion coefficient separating vanishing from
/// spreading by bisection on the verdict.
pub fn bisect_mu_star(template: &ProblemSpec, mu_lo_seed: f64, mu_hi_seed: f64, config: &BisectConfig) -> Result<MuStarEstimate> {
    template.validate()?;
    if !(mu_lo_seed > 0.0 && mu_hi_seed > mu_lo_seed && mu_hi_seed.is_finite()) {
        return Err(Error::Precondition(format!(
            "seeds must satisfy 0 < mu_lo < mu_hi, got ({mu_lo_seed}, {mu_hi_seed})"
        )));
    }
    let threshold = lambda_threshold(&template.params, template.variant);
    // For two fronts h0 is the initial half-width.
    let extent = template.initial.h0;
    if extent >= threshold.value {
        return Err(Error::Precondition(format!(
            "h0 = {extent} is not below the threshold length {}; every mu spreads",
            threshold.value
        )));
    }

    let mut probes = Vec::new();
    let seeds = parallel::map(config.execution, &[mu_lo_seed, mu_hi_seed], |&mu| probe(template, mu, &config.probe));
    let mut seeds = seeds.into_iter();
    let mut lo = seeds.next().unwrap()?;
    let mut hi = seeds.next().unwrap()?;

    let mut expansions = 0;
    while lo.verdict == Verdict::Spreading {
        if expansions == config.max_expansions {
            return Err(Error::SeedExpansion(format!(
                "mu = {} still spreads after {expansions} shrinkings",
                lo.mu
            )));
        }
        expansions += 1;
        let mu = lo.mu / config.expansion_factor;
        probes.push(std::mem::replace(&mut lo, probe(template, mu, &config.probe)?));
    }
    expansions = 0;
    while hi.verdict != Verdict::Spreading {
        if expansions == config.max_expansions {
            return Err(Error::SeedExpansion(format!(
                "mu = {} still does not spread after {expansions} enlargements",
                hi.mu
            )));
        }
        expansions += 1;
        let mu = hi.mu * config.expansion_factor;
        probes.push(std::mem::replace(&mut hi, probe(template, mu, &config.probe)?));
    }
    let seeds = (lo.mu, hi.mu);

    let (mut mu_lo, mut mu_hi) = seeds;
    probes.push(lo);
    probes.push(hi);
    for _ in 0..config.n_iters {
        let mid = 0.5 * (mu_lo + mu_hi);
        let p = probe(template, mid, &config.probe)?;
        if p.verdict == Verdict::Spreading {
            mu_hi = mid;
        } else {
            mu_lo = mid;
        }
        probes.push(p);
    }

    probes.sort_by(|a, b| a.mu.total_cmp(&b.mu));
    check_monotone(&probes)?;
    let warnings = probes
        .iter()
        .filter(|p| p.fallback)
        .map(|p| format!("mu = {} undetermined up to t = {}; counted as vanishing", p.mu, p.t_max))
        .collect();
    Ok(MuStarEstimate {
        mu_lo,
        mu_hi,
        seeds,
        iterations: config.n_iters,
        probes,
        warnings,
        template: template.clone(),
    })
}

/// No vanishing probe may sit above a spreading one. `probes` must be sorted
/// by `mu`.
pub fn check_monotone(probes: &[Probe]) -> Result<()> {
    let first_spread = probes.iter().position(|p| p.verdict == Verdict::Spreading);
    if let Some(k) = first_spread {
        if probes[k..].iter().any(|p| p.verdict != Verdict::Spreading) {
            return Err(Error::NonMonotoneProbes(probes.to_vec()));
        }
    }
    Ok(())
}
