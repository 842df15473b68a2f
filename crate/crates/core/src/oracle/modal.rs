use faer::Mat;
use num_complex::Complex64;

use super::{fill_normals, SdeConfig};
use crate::error::{Error, Result};
use crate::linop::{Alpha0Field, EigenSystem};
use crate::spectra::ModalDiffusionMatrix;

/// Recorded modal coefficients, `trajectories[t][a][step]` for retained mode `modes[a]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalRun {
    pub modes: Vec<usize>,
    pub eigenvalues: Vec<Complex64>,
    pub dt: f64,
    pub transient: f64,
    pub trajectories: Vec<Vec<Vec<Complex64>>>,
}

impl ModalRun {
    /// Records of retained mode `a` across the ensemble.
    pub fn mode_series(&self, a: usize) -> Vec<Vec<Complex64>> {
        self.trajectories.iter().map(|t| t[a].clone()).collect()
    }
}

/// Euler–Maruyama on ċᵢ = λᵢcᵢ + ξᵢ with ξᵢ = ∫[wᵢ*√ᾱ₀η + wᵢ⁺*√ᾱ₀*η⁺]dx,
/// starting from c = 0 and discarding a transient of 10/min|Re λᵢ|.
pub fn simulate_modal(
    eigsys: &EigenSystem,
    d: &ModalDiffusionMatrix,
    alpha0: &Alpha0Field,
    config: &SdeConfig,
    retained: &[usize],
) -> Result<ModalRun> {
    if retained.is_empty() {
        return Err(Error::invalid("no modes retained"));
    }
    let grid = eigsys.grid();
    grid.check_len(alpha0.values.len())?;
    let n = grid.n();
    let rows: Vec<usize> = retained
        .iter()
        .map(|&i| {
            d.modes
                .iter()
                .position(|&m| m == i)
                .ok_or_else(|| Error::invalid(format!("mode {i} is not in the diffusion matrix")))
        })
        .collect::<Result<_>>()?;
    let lambda: Vec<Complex64> = retained.iter().map(|&i| eigsys.eigenvalues()[i]).collect();
    if let Some((a, l)) = lambda.iter().enumerate().find(|(_, l)| l.re >= 0.0) {
        return Err(Error::NonStationary { index: retained[a], re: l.re });
    }
    config.check_step(lambda.iter().map(|l| l.norm()).fold(0.0, f64::max))?;

    let m = retained.len();
    let left = eigsys.left_matrix();
    let sq = grid.dx().sqrt();
    let b = Mat::<Complex64>::from_fn(m, 2 * n, |a, x| {
        let i = retained[a];
        if x < n {
            left[(x, i)].conj() * alpha0.values[x].sqrt() * sq
        } else {
            left[(x, i)].conj() * alpha0.values[x - n].conj().sqrt() * sq
        }
    });
    let bbt = &b * b.transpose();
    let mut scale: f64 = 0.0;
    let mut dev: f64 = 0.0;
    for p in 0..m {
        for q in 0..m {
            let want = d.entries[(rows[p], rows[q])];
            scale = scale.max(want.norm());
            dev = dev.max((bbt[(p, q)] - want).norm());
        }
    }
    if dev > 1e-8 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Numerical(format!(
            "projected noise covariance deviates from D by {dev:.3e}"
        )));
    }

    let dt = config.dt;
    let slowest = lambda.iter().map(|l| -l.re).fold(f64::INFINITY, f64::min);
    let transient = 10.0 / slowest;
    let skip = (transient / dt).ceil() as usize;
    let steps = config.steps();
    // stationary amplitudes, for the blow-up guard
    let reference = (0..m)
        .map(|a| (d.entries[(rows[a], rows[a])].norm() / (2.0 * slowest)).sqrt())
        .fold(1e-300, f64::max);
    let sdt = dt.sqrt();

    let mut trajectories = Vec::with_capacity(config.n_traj);
    let mut z = vec![0.0; 2 * n];
    for t in 0..config.n_traj {
        let mut rng = config.rng(t);
        let mut c = vec![Complex64::new(0.0, 0.0); m];
        let mut rec = vec![Vec::with_capacity(steps); m];
        for step in 0..skip + steps {
            fill_normals(&mut rng, &mut z, sdt);
            for a in 0..m {
                let xi: Complex64 = (0..2 * n).map(|x| b[(a, x)] * z[x]).sum();
                let drift = lambda[a] * c[a] * dt;
                c[a] += drift + xi;
            }
            if step >= skip {
                for a in 0..m {
                    rec[a].push(c[a]);
                }
            }
            if step % 64 == 0 && c.iter().any(|v| !v.is_finite() || v.norm() > 1e3 * reference) {
                return Err(Error::BlowUp { time: step as f64 * dt });
            }
        }
        trajectories.push(rec);
    }
    Ok(ModalRun { modes: retained.to_vec(), eigenvalues: lambda, dt, transient, trajectories })
}
