//! Run configuration: a sectioned `key = value` document (TOML syntax).
//!
//! ```text
//! [model]
//! a = 0.5
//! b = 0.5
//! c = 1.0
//! d = 1.0
//!
//! [expansion]
//! variant = "DFB"
//! mu = 2.0
//! rho = 1.0
//! h0 = 1.0
//!
//! [numerics]
//! n_cells = 128
//! dt = "auto"
//! t_max = 50.0
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use stefanpp_core::analysis::ClassifyConfig;
use stefanpp_core::model::{ExpansionParams, InitialData, ModelParams, ProblemVariant, ProfileRule};
use stefanpp_core::solver::{FluxOrder, Hooks, NumericsConfig, ProblemSpec, TimeStep};
use stefanpp_core::verify::AnalysisSettings;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expansion: Option<ExpansionSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub numerics: Option<NumericsSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analysis: Option<AnalysisSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpansionSection {
    /// `DFB`, `NFB` or `TFB`.
    pub variant: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_l: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_l: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_r: Option<f64>,
    pub h0: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    /// `sine`, `half_cosine` or `default` (the compatible family of the variant).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude_u: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude_v: Option<f64>,
    /// CSV with header `u,v`, uniform samples spanning the initial interval.
    /// Relative paths resolve against the config file's directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
}

/// `"auto"` or a fixed step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DtSetting {
    Fixed(f64),
    Keyword(String),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_cells: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<DtSetting>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_every: Option<f64>,
    /// 1 or 2.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flux_order: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clamp_budget: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_halvings: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validation_tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_mass: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_front: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe_xs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit_tol: Option<f64>,
}

/// A parsed config and the directory relative paths resolve against.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub base_dir: PathBuf,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| anyhow::anyhow!("config: {e}"))
    }

    pub fn load(path: &Path) -> Result<LoadedConfig> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let config = Self::parse(&text).with_context(|| format!("in {}", path.display()))?;
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(LoadedConfig { config, base_dir })
    }

    #[cfg(test)]
    pub fn render(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn params(&self) -> ModelParams {
        let ModelSection { a, b, c, d } = self.model;
        ModelParams { a, b, c, d }
    }

    pub fn analysis_settings(&self) -> AnalysisSettings {
        let mut s = AnalysisSettings::default();
        if let Some(a) = &self.analysis {
            let mut classify = ClassifyConfig::default();
            if let Some(x) = a.eps_mass {
                classify.eps_mass = x;
            }
            if let Some(x) = a.eps_front {
                classify.eps_front = x;
            }
            s.classify = classify;
            if let Some(p) = &a.probe_xs {
                s.probe_xs = p.clone();
            }
            if let Some(x) = a.alpha {
                s.alpha = x;
            }
            if let Some(x) = a.limit_tol {
                s.limit_tol = x;
            }
        }
        s
    }
}

fn require(value: Option<f64>, section: &str, key: &str) -> Result<f64> {
    value.with_context(|| format!("config: missing key `{key}` in [{section}]"))
}

impl LoadedConfig {
    /// Full problem spec; needs the `[expansion]` section.
    pub fn to_spec(&self) -> Result<ProblemSpec> {
        let cfg = &self.config;
        let exp = cfg
            .expansion
            .as_ref()
            .context("config: missing section [expansion] (keys variant, mu, rho, h0)")?;
        let variant: ProblemVariant = exp.variant.parse()?;
        let expansion = match variant {
            ProblemVariant::Tfb => ExpansionParams::TwoSided {
                mu_l: require(exp.mu_l.or(exp.mu), "expansion", "mu_l")?,
                rho_l: exp.rho_l.or(exp.rho).unwrap_or(1.0),
                mu_r: require(exp.mu_r.or(exp.mu), "expansion", "mu_r")?,
                rho_r: exp.rho_r.or(exp.rho).unwrap_or(1.0),
            },
            _ => {
                if exp.mu_l.is_some() || exp.rho_l.is_some() {
                    bail!("config: keys `mu_l` and `rho_l` in [expansion] apply only to TFB");
                }
                ExpansionParams::OneSided {
                    mu: require(exp.mu.or(exp.mu_r), "expansion", "mu")?,
                    rho: exp.rho.or(exp.rho_r).unwrap_or(1.0),
                }
            }
        };
        let initial = self.initial_data(variant, exp.h0)?;
        let numerics = self.numerics()?;
        let spec = ProblemSpec {
            variant,
            params: cfg.params(),
            expansion,
            initial,
            numerics,
            hooks: Hooks::default(),
        };
        spec.validate()?;
        Ok(spec)
    }

    fn initial_data(&self, variant: ProblemVariant, h0: f64) -> Result<InitialData> {
        let section = self.config.initial.clone().unwrap_or_default();
        let amp_u = section.amplitude_u.unwrap_or(1.0);
        let amp_v = section.amplitude_v.unwrap_or(1.0);
        if let Some(file) = &section.file {
            if section.family.is_some() {
                bail!("config: [initial] takes either `family` or `file`, not both");
            }
            let (u, v) = read_samples(&self.base_dir.join(file))?;
            return Ok(InitialData {
                h0,
                u0: ProfileRule::Samples { values: u },
                v0: ProfileRule::Samples { values: v },
            });
        }
        let rule = |amplitude: f64| -> Result<ProfileRule> {
            Ok(match section.family.as_deref().unwrap_or("default") {
                "default" => ProfileRule::default_for(variant, amplitude),
                "sine" => ProfileRule::Sine { amplitude },
                "half_cosine" => ProfileRule::HalfCosine { amplitude },
                other => bail!("config: [initial] family must be sine, half_cosine or default, got `{other}`"),
            })
        };
        Ok(InitialData {
            h0,
            u0: rule(amp_u)?,
            v0: rule(amp_v)?,
        })
    }

    fn numerics(&self) -> Result<NumericsConfig> {
        let mut n = NumericsConfig::default();
        let Some(s) = &self.config.numerics else {
            return Ok(n);
        };
        if let Some(x) = s.n_cells {
            n.n_cells = x;
        }
        match &s.dt {
            None => {}
            Some(DtSetting::Fixed(dt)) => n.dt = TimeStep::Fixed(*dt),
            Some(DtSetting::Keyword(k)) if k == "auto" => n.dt = TimeStep::Auto,
            Some(DtSetting::Keyword(k)) => bail!("config: [numerics] dt must be \"auto\" or a number, got `{k}`"),
        }
        if let Some(x) = s.t_max {
            n.t_max = x;
        }
        n.snapshot_every = s.snapshot_every.or(n.snapshot_every);
        if let Some(x) = s.flux_order {
            n.flux_order = FluxOrder::from_order(x)?;
        }
        if let Some(x) = s.clamp_budget {
            n.clamp_budget = x;
        }
        if let Some(x) = s.max_halvings {
            n.max_halvings = x;
        }
        if let Some(x) = s.validation_tol {
            n.validation_tol = x;
        }
        Ok(n)
    }
}

#[derive(Deserialize)]
struct SampleRow {
    u: f64,
    v: f64,
}

fn read_samples(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut reader = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let mut u = Vec::new();
    let mut v = Vec::new();
    for (i, row) in reader.deserialize::<SampleRow>().enumerate() {
        let row = row.with_context(|| format!("{}: row {}", path.display(), i + 2))?;
        u.push(row.u);
        v.push(row.v);
    }
    if u.len() < 3 {
        bail!("{}: need at least 3 samples, found {}", path.display(), u.len());
    }
    Ok((u, v))
}
