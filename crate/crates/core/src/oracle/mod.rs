//! Stochastic cross-checks of the analytic spectra.
//!
//! The linearized Langevin equations are integrated directly, either in the
//! modal basis ([`simulate_modal`]) or on the spatial grid
//! ([`simulate_grid`]), and the resulting records are turned into spectra by
//! ensemble-averaged periodograms ([`estimate_spectrum`]).
//!
//! Noises are real and white with variance 1/(dx·dt) per sample and enter
//! through the principal square root of ᾱ₀. Every trajectory draws from its
//! own ChaCha8 stream selected by the trajectory index, so ensembles are
//! reproducible and independent of execution order.

mod compare;
mod estimate;
mod grid;
mod modal;

pub use compare::{fit_drift, homodyne_oracle, DriftFit, HomodyneComparison, OracleRun, OracleSampling};
pub use estimate::{
    estimate_cross_spectrum, estimate_spectrum, expected_periodogram, EstimatedSpectrum, PeriodogramAccumulator,
};
pub use grid::{max_local_rate, simulate_grid, GridOptions, GridSummary, GridTrajectory};
pub use modal::{simulate_modal, ModalRun};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::model::Grid1D;

/// Largest dt·|λ_max| accepted by the integrators.
pub const MAX_STEP_PRODUCT: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    EulerMaruyama,
}

impl Scheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::EulerMaruyama => "euler-maruyama",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdeConfig {
    pub dt: f64,
    pub t_total: f64,
    pub n_traj: usize,
    pub seed: u64,
    pub scheme: Scheme,
}

impl SdeConfig {
    pub fn new(dt: f64, t_total: f64, n_traj: usize, seed: u64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::invalid(format!("dt must be positive, got {dt}")));
        }
        if !(t_total >= dt) || !t_total.is_finite() {
            return Err(Error::invalid(format!("t_total must be at least dt, got {t_total}")));
        }
        if n_traj == 0 {
            return Err(Error::invalid("n_traj must be at least 1"));
        }
        Ok(Self { dt, t_total, n_traj, seed, scheme: Scheme::EulerMaruyama })
    }

    /// Number of recorded steps.
    pub fn steps(&self) -> usize {
        (self.t_total / self.dt).round() as usize
    }

    /// Random stream of trajectory `traj`.
    pub fn rng(&self, traj: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(traj as u64);
        rng
    }

    /// Rejects steps with dt·|λ_max| ≥ [`MAX_STEP_PRODUCT`].
    pub fn check_step(&self, lambda_max: f64) -> Result<()> {
        let p = self.dt * lambda_max;
        if !(p < MAX_STEP_PRODUCT) {
            return Err(Error::Numerical(format!(
                "dt*|lambda_max| = {p:.3} must stay below {MAX_STEP_PRODUCT}; reduce dt below {:.3e}",
                MAX_STEP_PRODUCT / lambda_max
            )));
        }
        Ok(())
    }
}

/// Real white noises η, η⁺ on the grid for a run of time steps, each sample
/// with variance 1/(dx·dt).
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseRealization {
    /// `eta[step][x]`.
    pub eta: Vec<Vec<f64>>,
    pub eta_plus: Vec<Vec<f64>>,
    pub dx: f64,
    pub dt: f64,
}

impl NoiseRealization {
    pub fn generate(grid: &Grid1D, dt: f64, steps: usize, rng: &mut impl Rng) -> Self {
        let scale = 1.0 / (grid.dx() * dt).sqrt();
        let mut draw = || {
            let mut v = vec![0.0; grid.n()];
            fill_normals(rng, &mut v, scale);
            v
        };
        let mut eta = Vec::with_capacity(steps);
        let mut eta_plus = Vec::with_capacity(steps);
        for _ in 0..steps {
            eta.push(draw());
            eta_plus.push(draw());
        }
        Self { eta, eta_plus, dx: grid.dx(), dt }
    }
}

pub(crate) fn fill_normals(rng: &mut impl Rng, buf: &mut [f64], scale: f64) {
    for v in buf {
        let z: f64 = rng.sample(StandardNormal);
        *v = z * scale;
    }
}
