use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linop::{Alpha0Field, EigenSystem};
use crate::model::ModelParams;

/// Dᵢⱼ = ∫dx [wᵢ*wⱼ*ᾱ₀ + wᵢ⁺*wⱼ⁺*ᾱ₀*] over the retained (non-Goldstone) modes.
#[derive(Debug, Clone)]
pub struct ModalDiffusionMatrix {
    pub entries: Mat<Complex64>,
    /// Eigensystem index of each row/column.
    pub modes: Vec<usize>,
}

impl ModalDiffusionMatrix {
    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// Entry for eigensystem modes (i, j), if both are retained.
    pub fn get(&self, i: usize, j: usize) -> Option<Complex64> {
        let a = self.modes.iter().position(|&m| m == i)?;
        let b = self.modes.iter().position(|&m| m == j)?;
        Some(self.entries[(a, b)])
    }

    /// max |Dᵢⱼ − Dⱼᵢ|.
    pub fn asymmetry(&self) -> f64 {
        let m = self.len();
        let mut d: f64 = 0.0;
        for j in 0..m {
            for i in 0..j {
                d = d.max((self.entries[(i, j)] - self.entries[(j, i)]).norm());
            }
        }
        d
    }
}

pub fn modal_diffusion(eigsys: &EigenSystem, alpha0: &Alpha0Field) -> Result<ModalDiffusionMatrix> {
    modal_diffusion_for(eigsys, alpha0, &eigsys.retained())
}

/// Modal diffusion matrix restricted to the listed modes.
pub fn modal_diffusion_for(
    eigsys: &EigenSystem,
    alpha0: &Alpha0Field,
    modes: &[usize],
) -> Result<ModalDiffusionMatrix> {
    let grid = eigsys.grid();
    grid.check_len(alpha0.values.len())?;
    let n = grid.n();
    let dx = grid.dx();
    let left = eigsys.left_matrix();
    let m = modes.len();
    let wu = Mat::<Complex64>::from_fn(n, m, |x, a| left[(x, modes[a])].conj());
    let wl = Mat::<Complex64>::from_fn(n, m, |x, a| left[(n + x, modes[a])].conj());
    let au = Mat::<Complex64>::from_fn(n, m, |x, a| wu[(x, a)] * alpha0.values[x] * dx);
    let al = Mat::<Complex64>::from_fn(n, m, |x, a| wl[(x, a)] * alpha0.values[x].conj() * dx);
    let raw = wu.transpose() * &au + wl.transpose() * &al;
    // the integrand is symmetric in (i, j); remove rounding asymmetry
    let entries = Mat::<Complex64>::from_fn(m, m, |i, j| 0.5 * (raw[(i, j)] + raw[(j, i)]));
    Ok(ModalDiffusionMatrix { entries, modes: modes.to_vec() })
}

/// Sᵢⱼ(Ω) = Dᵢⱼ / [(λᵢ − iΩ)(λⱼ + iΩ)], with `eigenvalues` in the row order of `d`.
pub fn modal_spectrum(
    d: &ModalDiffusionMatrix,
    eigenvalues: &[Complex64],
    omega: f64,
) -> Result<Mat<Complex64>> {
    if eigenvalues.len() != d.len() {
        return Err(Error::invalid(format!(
            "{} eigenvalues for a {}-mode diffusion matrix",
            eigenvalues.len(),
            d.len()
        )));
    }
    if let Some((a, l)) = eigenvalues.iter().enumerate().find(|(_, l)| l.re >= 0.0) {
        return Err(Error::NonStationary { index: d.modes[a], re: l.re });
    }
    let iw = Complex64::new(0.0, omega);
    Ok(Mat::<Complex64>::from_fn(d.len(), d.len(), |i, j| {
        d.entries[(i, j)] / ((eigenvalues[i] - iw) * (eigenvalues[j] + iw))
    }))
}

/// Drift diffusion of the soliton position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftDiffusion {
    /// D = (2/κ²)·Re ∫dx w₁²ᾱ₀*, with w₁ normalized against ∂ₓψ̄.
    pub coefficient: f64,
    /// The same quantity from the Goldstone diagonal of the modal diffusion
    /// matrix, D₁₁/κ².
    pub modal: f64,
}

impl DriftDiffusion {
    /// Predicted ⟨x₁²(t)⟩ after time t.
    pub fn variance(&self, t: f64) -> f64 {
        self.coefficient * t
    }
}

pub fn drift_diffusion(
    eigsys: &EigenSystem,
    alpha0: &Alpha0Field,
    params: &ModelParams,
) -> Result<DriftDiffusion> {
    let w = eigsys.goldstone_left_normalized()?;
    eigsys.grid().check_len(alpha0.values.len())?;
    let dx = eigsys.grid().dx();
    let k2 = params.kappa * params.kappa;
    let direct: Complex64 = w
        .upper
        .iter()
        .zip(&alpha0.values)
        .map(|(w, a)| w * w * a.conj())
        .sum::<Complex64>()
        * dx;
    let modal: Complex64 = w
        .upper
        .iter()
        .zip(&w.lower)
        .zip(&alpha0.values)
        .map(|((u, l), a)| u.conj() * u.conj() * a + l.conj() * l.conj() * a.conj())
        .sum::<Complex64>()
        * dx;
    Ok(DriftDiffusion { coefficient: 2.0 * direct.re / k2, modal: modal.re / k2 })
}
