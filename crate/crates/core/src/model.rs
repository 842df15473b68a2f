//! Normalized model parameters, the periodic transverse grid and the
//! two-component fields that live on it.
//!
//! Units: time in 1/γ₁, transverse lengths in the diffraction length l₁,
//! frequencies as Ω = ω/γ₁. The classical field is ψ = 𝒜₁/κ.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Sign of the pump detuning (self-focusing `Plus`, self-defocusing `Minus`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sigma {
    Plus,
    Minus,
}

impl Sigma {
    pub fn value(self) -> f64 {
        match self {
            Sigma::Plus => 1.0,
            Sigma::Minus => -1.0,
        }
    }

    pub fn from_value(v: f64) -> Result<Self> {
        if v == 1.0 {
            Ok(Sigma::Plus)
        } else if v == -1.0 {
            Ok(Sigma::Minus)
        } else {
            Err(Error::invalid(format!("sigma must be +1 or -1, got {v}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub mu: f64,
    pub delta1: f64,
    pub sigma: Sigma,
    pub kappa: f64,
}

impl ModelParams {
    pub fn new(mu: f64, delta1: f64, sigma: Sigma, kappa: f64) -> Result<Self> {
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::invalid(format!("mu must be positive, got {mu}")));
        }
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(Error::invalid(format!("kappa must be positive, got {kappa}")));
        }
        if !delta1.is_finite() {
            return Err(Error::invalid("delta1 must be finite"));
        }
        Ok(Self { mu, delta1, sigma, kappa })
    }

    /// Self-focusing parameters with κ = 1.
    pub fn focusing(mu: f64, delta1: f64) -> Result<Self> {
        Self::new(mu, delta1, Sigma::Plus, 1.0)
    }

    /// Upper pump limit μ₀ = √(1 + Δ₁²) of the soliton existence region.
    pub fn mu0(&self) -> f64 {
        (1.0 + self.delta1 * self.delta1).sqrt()
    }
}

/// Uniform periodic grid on [−L/2, L/2).
#[derive(Clone)]
pub struct Grid1D {
    n: usize,
    length: f64,
    dx: f64,
    x: Vec<f64>,
    k: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Grid1D {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Grid1D")
            .field("n", &self.n)
            .field("length", &self.length)
            .field("dx", &self.dx)
            .finish()
    }
}

impl PartialEq for Grid1D {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.length == other.length
    }
}

pub fn make_grid(n_points: usize, length: f64) -> Result<Grid1D> {
    if n_points < 8 || !n_points.is_power_of_two() {
        return Err(Error::invalid(format!(
            "n_points must be a power of two >= 8, got {n_points}"
        )));
    }
    if !(length > 0.0) || !length.is_finite() {
        return Err(Error::invalid(format!("length must be positive, got {length}")));
    }
    let n = n_points;
    let dx = length / n as f64;
    let x = (0..n).map(|j| -length / 2.0 + j as f64 * dx).collect();
    let k = (0..n)
        .map(|m| {
            let m = if m <= n / 2 { m as f64 } else { m as f64 - n as f64 };
            2.0 * PI * m / length
        })
        .collect();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    Ok(Grid1D { n, length, dx, x, k, fwd, inv })
}

impl Grid1D {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    /// Wavenumbers in FFT ordering; index n/2 holds the Nyquist wavenumber +πN/L.
    pub fn k(&self) -> &[f64] {
        &self.k
    }

    /// Index of the mirror point −x_j (the grid is symmetric modulo L).
    pub fn mirror(&self, j: usize) -> usize {
        (self.n - j) % self.n
    }

    pub(crate) fn fft_forward(&self, buf: &mut [Complex64]) {
        self.fwd.process(buf);
    }

    /// Unnormalized inverse transform.
    pub(crate) fn fft_inverse(&self, buf: &mut [Complex64]) {
        self.inv.process(buf);
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::invalid(format!(
                "field has {len} samples, grid has {}",
                self.n
            )));
        }
        Ok(())
    }

    /// Samples f(x) + f(x − L) + f(x + L) on the grid, so localized profiles
    /// have no derivative jump across the periodic boundary.
    pub fn sample_periodized<T>(&self, f: impl Fn(f64) -> T) -> Vec<T>
    where
        T: std::ops::Add<Output = T>,
    {
        self.x
            .iter()
            .map(|&x| f(x - self.length) + f(x) + f(x + self.length))
            .collect()
    }

    /// Multiplies the spectrum of `field` by `symbol(k)`.
    pub fn apply_symbol(
        &self,
        field: &[Complex64],
        symbol: impl Fn(f64) -> Complex64,
    ) -> Result<Vec<Complex64>> {
        self.check_len(field.len())?;
        let mut buf = field.to_vec();
        self.fft_forward(&mut buf);
        let scale = 1.0 / self.n as f64;
        for (c, &k) in buf.iter_mut().zip(&self.k) {
            *c *= symbol(k) * scale;
        }
        self.fft_inverse(&mut buf);
        Ok(buf)
    }

    /// First column of the real symmetric circulant matrix representing ∂ₓ².
    pub fn laplacian_kernel(&self) -> Vec<f64> {
        let mut buf: Vec<Complex64> =
            self.k.iter().map(|&k| Complex64::new(-k * k, 0.0)).collect();
        self.fft_inverse(&mut buf);
        buf.iter().map(|c| c.re / self.n as f64).collect()
    }
}

/// Spectral second derivative: FFT, multiply by −k², inverse FFT.
pub fn second_derivative(field: &[Complex64], grid: &Grid1D) -> Result<Vec<Complex64>> {
    grid.apply_symbol(field, |k| Complex64::new(-k * k, 0.0))
}

/// Spectral first derivative; the Nyquist coefficient is dropped.
pub fn first_derivative(field: &[Complex64], grid: &Grid1D) -> Result<Vec<Complex64>> {
    let nyquist = PI * grid.n as f64 / grid.length;
    grid.apply_symbol(field, |k| {
        if (k - nyquist).abs() < 1e-9 * nyquist {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, k)
        }
    })
}

/// Two-component field (a₁, a₁⁺) sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FluctuationField {
    pub upper: Vec<Complex64>,
    pub lower: Vec<Complex64>,
}

impl FluctuationField {
    pub fn new(upper: Vec<Complex64>, lower: Vec<Complex64>) -> Result<Self> {
        if upper.len() != lower.len() {
            return Err(Error::invalid("upper and lower components differ in length"));
        }
        Ok(Self { upper, lower })
    }

    /// Physical LOF vector (α, α*).
    pub fn conjugate_pair(upper: Vec<Complex64>) -> Self {
        let lower = upper.iter().map(|c| c.conj()).collect();
        Self { upper, lower }
    }

    pub fn zeros(n: usize) -> Self {
        let z = vec![Complex64::new(0.0, 0.0); n];
        Self { upper: z.clone(), lower: z }
    }

    pub fn len(&self) -> usize {
        self.upper.len()
    }

    pub fn is_empty(&self) -> bool {
        self.upper.is_empty()
    }

    /// Stacked (upper, lower) vector of length 2N.
    pub fn to_stacked(&self) -> Vec<Complex64> {
        self.upper.iter().chain(self.lower.iter()).copied().collect()
    }

    pub fn from_stacked(v: &[Complex64]) -> Self {
        let n = v.len() / 2;
        Self { upper: v[..n].to_vec(), lower: v[n..].to_vec() }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            upper: self.upper.iter().map(|&u| u * c).collect(),
            lower: self.lower.iter().map(|&u| u * c).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            upper: self.upper.iter().zip(&other.upper).map(|(a, b)| a + b).collect(),
            lower: self.lower.iter().zip(&other.lower).map(|(a, b)| a + b).collect(),
        }
    }

    /// max‖lower − conj(upper)‖ relative to the field magnitude.
    pub fn conjugation_defect(&self) -> f64 {
        let scale = self
            .upper
            .iter()
            .chain(&self.lower)
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        self.upper
            .iter()
            .zip(&self.lower)
            .map(|(u, l)| (l - u.conj()).norm())
            .fold(0.0, f64::max)
            / scale
    }

    pub fn max_abs(&self) -> f64 {
        self.upper.iter().chain(&self.lower).map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// Discrete ⟨u|s⟩ = Σⱼ [u*·s + u⁺*·s⁺] dx.
pub fn scalar_product(u: &FluctuationField, s: &FluctuationField, grid: &Grid1D) -> Result<Complex64> {
    grid.check_len(u.len())?;
    grid.check_len(s.len())?;
    let sum: Complex64 = u
        .upper
        .iter()
        .zip(&s.upper)
        .chain(u.lower.iter().zip(&s.lower))
        .map(|(a, b)| a.conj() * b)
        .sum();
    Ok(sum * grid.dx)
}

pub fn norm(u: &FluctuationField, grid: &Grid1D) -> Result<f64> {
    Ok(scalar_product(u, u, grid)?.re.sqrt())
}

/// Uniform axis of `points` frequencies on [0, omega_max].
pub fn frequency_axis(omega_max: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 || !(omega_max > 0.0) {
        return Err(Error::invalid("frequency axis needs >= 2 points and omega_max > 0"));
    }
    Ok((0..points)
        .map(|i| omega_max * i as f64 / (points - 1) as f64)
        .collect())
}
