//! Modal diffusion, modal correlation spectra, homodyne squeezing spectra,
//! intensity-fluctuation spectra and the soliton drift diffusion.
//!
//! All spectra are in normalized units (γ₁ = 1) and use the co-moving
//! local oscillator (no relative drift between LOF and soliton).

mod diffusion;
mod squeeze;

pub use diffusion::{
    drift_diffusion, modal_diffusion, modal_diffusion_for, modal_spectrum, DriftDiffusion,
    ModalDiffusionMatrix,
};
pub use squeeze::{
    homodyne_correlation, intensity_spectrum, optimize_lof_phase, squeeze_at, plane_wave_phase_curve, squeezing_spectrum,
    squeezing_spectrum_detector, squeezing_spectrum_truncated, squeezing_spectrum_with, PhaseCurve,
    SpectrumOptions,
};

pub(crate) use squeeze::golden_section;

use crate::error::{Error, Result};
use crate::model::Grid1D;

/// Largest imaginary part tolerated before a spectrum is declared real.
pub const IMAG_TOLERANCE: f64 = 1e-8;

/// Detector aperture [x₀ − Δx/2, x₀ + Δx/2].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorWindow {
    pub center: f64,
    pub width: f64,
}

impl DetectorWindow {
    pub fn new(center: f64, width: f64) -> Result<Self> {
        if !(width > 0.0) || !width.is_finite() || !center.is_finite() {
            return Err(Error::invalid(format!(
                "detector width must be positive and finite, got {width}"
            )));
        }
        Ok(Self { center, width })
    }

    /// Window whose width is given in units of the soliton width 1/β, Δx = Σ/β.
    pub fn from_normalized(center: f64, sigma: f64, beta: f64) -> Result<Self> {
        if !(beta > 0.0) {
            return Err(Error::invalid("beta must be positive"));
        }
        Self::new(center, sigma / beta)
    }

    /// Normalized size Σ = β·Δx.
    pub fn normalized_size(&self, beta: f64) -> f64 {
        self.width * beta
    }

    /// Window covering the whole periodic domain.
    pub fn full(grid: &Grid1D) -> Self {
        Self { center: 0.0, width: grid.length() }
    }

    /// Per-sample quadrature weights: the length of each grid cell
    /// [xⱼ − dx/2, xⱼ + dx/2] (and its periodic images) inside the window.
    pub fn weights(&self, grid: &Grid1D) -> Result<Vec<f64>> {
        let half = grid.length() / 2.0;
        let tol = 1e-12 * grid.length();
        let (a, b) = (self.center - self.width / 2.0, self.center + self.width / 2.0);
        if a < -half - tol || b > half + tol {
            return Err(Error::invalid(format!(
                "detector window [{a}, {b}] leaves the domain [-{half}, {half}]"
            )));
        }
        let dx = grid.dx();
        let l = grid.length();
        Ok(grid
            .x()
            .iter()
            .map(|&x| {
                [-l, 0.0, l]
                    .iter()
                    .map(|s| {
                        let lo = (x + s - dx / 2.0).max(a);
                        let hi = (x + s + dx / 2.0).min(b);
                        (hi - lo).max(0.0)
                    })
                    .sum()
            })
            .collect())
    }
}

/// Frequency axis with real spectrum values and descriptive metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    pub omega: Vec<f64>,
    pub values: Vec<f64>,
    /// Largest |Im S| discarded when realizing the double sum.
    pub imag_residual: f64,
    pub lof: String,
    pub window: Option<DetectorWindow>,
    pub modes: usize,
    pub n_points: usize,
    pub length: f64,
}

impl SpectrumResult {
    pub fn min(&self) -> (f64, f64) {
        self.omega
            .iter()
            .zip(&self.values)
            .fold((f64::NAN, f64::INFINITY), |acc, (&w, &v)| if v < acc.1 { (w, v) } else { acc })
    }

    /// CSV with `#` metadata lines, columns `omega,S`, 17 significant digits.
    pub fn to_csv(&self, extra_header: &[(String, String)]) -> String {
        let mut out = String::new();
        for (k, v) in extra_header {
            out.push_str(&format!("# {k} = {v}\n"));
        }
        out.push_str(&format!("# lof = {}\n", self.lof));
        match &self.window {
            Some(w) => out.push_str(&format!("# window = center {:.17e} width {:.17e}\n", w.center, w.width)),
            None => out.push_str("# window = full\n"),
        }
        out.push_str(&format!(
            "# modes = {}\n# grid = {} points, length {}\n# imag_residual = {:.3e}\n",
            self.modes, self.n_points, self.length, self.imag_residual
        ));
        out.push_str("omega,S\n");
        for (w, s) in self.omega.iter().zip(&self.values) {
            out.push_str(&format!("{},{}\n", fmt17(*w), fmt17(*s)));
        }
        out
    }
}

/// Formats with 17 significant digits.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}
