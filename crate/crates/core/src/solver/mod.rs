//! Front-fixing solver for the moving-boundary problems.
//!
//! The physical domain `[g(t), h(t)]` is mapped onto `y in [0, 1]` by
//! `x = g + (h - g) y`. With `L = h - g` the prey and predator samples
//! `w(t, y) = u(t, x)`, `z(t, y) = v(t, x)` obey
//!
//! ```text
//! w_t = w_yy / L^2     + ((g' + y (h' - g')) / L) w_y + w (1 - w - a z)
//! z_t = d z_yy / L^2   + ((g' + y (h' - g')) / L) z_y + z (c - z + b w)
//! h'  = -(mu_r / L) (w_y(1) + rho_r z_y(1))
//! g'  = -(mu_l / L) (w_y(0) + rho_l z_y(0))        (two-front problem only)
//! ```
//!
//! Each step is IMEX Euler: diffusion implicit (one tridiagonal solve per
//! species), advection and reaction explicit, front speeds lagged from the
//! current state and fronts advanced by forward Euler.

mod export;
mod run;
mod state;
mod stepper;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ExpansionParams, InitialData, ModelParams, ProblemVariant};

pub use export::{write_snapshots_csv, write_trajectory_csv};
pub use run::{run, run_with, Control, Record, Termination, Trajectory};
pub use state::{init_state, init_state_unchecked, FrontFixedState};
pub use stepper::{boundary_fluxes, front_speeds, step, BoundaryFluxes, FrontSpeeds, StepInfo, Stepper};

/// Smallest admissible grid.
pub const MIN_CELLS: usize = 32;
/// Resolution floor applied in automatic time-step mode.
pub const AUTO_MIN_CELLS: usize = 64;

/// Time-step selection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeStep {
    /// `dt <= min(0.25 dx^2 / max(1, d), 0.1 / stiffness, 0.5 dx / |front speed|)`,
    /// halved (at most `max_halvings` times) after a failed step.
    Auto,
    Fixed(f64),
}

/// One-sided stencil for the boundary gradient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FluxOrder {
    First,
    Second,
}

impl FluxOrder {
    pub fn from_order(order: u32) -> Result<Self> {
        match order {
            1 => Ok(FluxOrder::First),
            2 => Ok(FluxOrder::Second),
            other => Err(Error::param("flux_order", format!("expected 1 or 2, got {other}"))),
        }
    }

    pub fn as_order(self) -> u32 {
        match self {
            FluxOrder::First => 1,
            FluxOrder::Second => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumericsConfig {
    /// Cells on `y in [0, 1]`; the state carries `n_cells + 1` nodes.
    pub n_cells: usize,
    pub dt: TimeStep,
    pub t_max: f64,
    /// Snapshot cadence in time units; `None` keeps only the initial state.
    pub snapshot_every: Option<f64>,
    pub flux_order: FluxOrder,
    /// Sub-epsilon negative values clamped to zero before the run fails.
    pub clamp_budget: u64,
    pub max_halvings: u32,
    /// Tolerance for the initial-data compatibility check.
    pub validation_tol: f64,
}

impl Default for NumericsConfig {
    fn default() -> Self {
        Self {
            n_cells: 128,
            dt: TimeStep::Auto,
            t_max: 10.0,
            snapshot_every: None,
            flux_order: FluxOrder::Second,
            clamp_budget: 1_000_000,
            max_halvings: 8,
            validation_tol: 1e-6,
        }
    }
}

impl NumericsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_cells < MIN_CELLS {
            return Err(Error::param(
                "n_cells",
                format!("must be at least {MIN_CELLS}, got {}", self.n_cells),
            ));
        }
        if let TimeStep::Fixed(dt) = self.dt {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(Error::param("dt", format!("must be positive, got {dt}")));
            }
        }
        if !(self.t_max.is_finite() && self.t_max >= 0.0) {
            return Err(Error::param("t_max", format!("must be finite and nonnegative, got {}", self.t_max)));
        }
        if let Some(every) = self.snapshot_every {
            if !(every.is_finite() && every > 0.0) {
                return Err(Error::param("snapshot_every", format!("must be positive, got {every}")));
            }
        }
        Ok(())
    }
}

/// Switches used by verification harnesses; all off for real runs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Hooks {
    /// Drop the reaction terms.
    pub disable_reaction: bool,
    /// Keep the fronts where they start (`mu = 0`).
    pub freeze_fronts: bool,
    /// Treat the predation coefficient `a` as zero.
    pub no_predation: bool,
    /// Accept initial data that fails the compatibility check (for example
    /// identically zero profiles).
    pub skip_validation: bool,
}

/// Full description of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub variant: ProblemVariant,
    pub params: ModelParams,
    pub expansion: ExpansionParams,
    pub initial: InitialData,
    pub numerics: NumericsConfig,
    #[serde(default)]
    pub hooks: Hooks,
}

impl ProblemSpec {
    /// Spec with the default compatible initial family for `variant`.
    pub fn standard(
        variant: ProblemVariant,
        params: ModelParams,
        expansion: ExpansionParams,
        h0: f64,
        numerics: NumericsConfig,
    ) -> Self {
        Self {
            variant,
            params,
            expansion,
            initial: InitialData::standard(variant, h0, 1.0, 1.0),
            numerics,
            hooks: Hooks::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.numerics.validate()?;
        match (self.variant, &self.expansion) {
            (ProblemVariant::Tfb, ExpansionParams::TwoSided { .. })
            | (ProblemVariant::Dfb | ProblemVariant::Nfb, ExpansionParams::OneSided { .. }) => {}
            (variant, _) => {
                return Err(Error::param(
                    "expansion",
                    format!("expansion parameters do not match variant {variant}"),
                ))
            }
        }
        if !self.hooks.freeze_fronts {
            self.expansion.validate()?;
        }
        Ok(())
    }

    pub fn with_mu(&self, mu: f64) -> Self {
        let mut spec = self.clone();
        spec.expansion = self.expansion.with_mu(mu);
        spec
    }

    pub fn with_t_max(&self, t_max: f64) -> Self {
        let mut spec = self.clone();
        spec.numerics.t_max = t_max;
        spec
    }
}
