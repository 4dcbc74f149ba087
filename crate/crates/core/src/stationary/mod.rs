//! Stationary profiles on truncated half lines.
//!
//! Scalar problems `-d u'' = u (f(x) - lambda u)`, `u(0) = 0`, and the
//! coupled predator-prey system, all discretised with second-order central
//! differences on a uniform grid and solved by monotone iteration between
//! ordered upper and lower solutions.

mod coupled;
mod scalar;

use serde::{Deserialize, Serialize};

use crate::linalg::interpolate_uniform;

pub use coupled::{coupled_bounds, solve_coupled_stationary, CoupledBounds, CoupledSolution, FarField};
pub use scalar::{
    epsilon_perturbed_profile, halfline_profile, solve_scalar_bvp, HalflineConfig, PerturbationSign, RightBc,
    ScalarBvpSpec,
};

/// Default grid density.
pub const NODES_PER_UNIT: usize = 16;

/// Cells for a domain of length `length` at the default density.
pub fn cells_for(length: f64) -> usize {
    ((length * NODES_PER_UNIT as f64).ceil() as usize).max(NODES_PER_UNIT)
}

/// Uniform nodes `i * length / n_cells`, `i = 0..=n_cells`.
pub fn uniform_nodes(length: f64, n_cells: usize) -> Vec<f64> {
    (0..=n_cells).map(|i| length * i as f64 / n_cells as f64).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileMeta {
    pub d: f64,
    pub lambda: f64,
    pub right_bc: RightBc,
    /// Length of the domain actually solved on (longer than the profile when
    /// it was restricted from a truncation sequence).
    pub solved_length: f64,
    /// Sup difference to the previous truncation, when there was one.
    pub truncation_discrepancy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryProfile {
    pub x: Vec<f64>,
    pub values: Vec<f64>,
    /// Sup norm of the discrete residual at the interior nodes.
    pub residual_sup: f64,
    pub iterations: usize,
    /// Whether a Newton polish produced the returned values.
    pub newton: bool,
    pub meta: ProfileMeta,
}

impl StationaryProfile {
    pub fn length(&self) -> f64 {
        *self.x.last().unwrap()
    }

    /// Linear interpolation, constant beyond the last node.
    pub fn eval(&self, x: f64) -> f64 {
        let l = self.length();
        if x >= l {
            *self.values.last().unwrap()
        } else {
            interpolate_uniform(&self.values, 0.0, l, x.max(0.0))
        }
    }

    pub fn sup(&self) -> f64 {
        crate::linalg::sup_norm(&self.values)
    }
}

/// Sup over interior nodes of `|-d D^2 u - u r|` where `r_i = rate(i)`.
pub(crate) fn residual_sup(u: &[f64], d: f64, dx: f64, rate: impl Fn(usize) -> f64) -> f64 {
    let k = d / (dx * dx);
    (1..u.len() - 1)
        .map(|i| (-k * (u[i - 1] - 2.0 * u[i] + u[i + 1]) - u[i] * rate(i)).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_density() {
        assert_eq!(cells_for(20.0), 320);
        assert_eq!(cells_for(0.1), NODES_PER_UNIT);
        let x = uniform_nodes(2.0, 4);
        assert_eq!(x, vec![0.0, 0.5, 1.0, 1.5, 2.0]);
    }
}
