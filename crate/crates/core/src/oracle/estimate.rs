use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Fewest segments an estimate may be built from.
const MIN_SEGMENTS: usize = 8;

/// Ensemble periodogram on the bins Ωₖ = 2πk/T, k = 0 … M/2, with the
/// standard error of the mean over segments.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatedSpectrum {
    pub omega: Vec<f64>,
    pub values: Vec<Complex64>,
    /// Standard error of the real part.
    pub std_err: Vec<f64>,
    /// Standard error of the imaginary part.
    pub std_err_imag: Vec<f64>,
    pub segments: usize,
}

impl EstimatedSpectrum {
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            omega: self.omega.clone(),
            values: self.values.iter().map(|v| v * factor).collect(),
            std_err: self.std_err.iter().map(|s| s * factor.abs()).collect(),
            std_err_imag: self.std_err_imag.iter().map(|s| s * factor.abs()).collect(),
            segments: self.segments,
        }
    }

    /// (Re Ŝ − S)/SE per bin.
    pub fn z_scores(&self, expected: &[f64]) -> Result<Vec<f64>> {
        if expected.len() != self.values.len() {
            return Err(Error::invalid(format!(
                "{} expected values for {} bins",
                expected.len(),
                self.values.len()
            )));
        }
        Ok(self
            .values
            .iter()
            .zip(&self.std_err)
            .zip(expected)
            .map(|((v, s), e)| (v.re - e) / s)
            .collect())
    }

    /// Complex z-scores (real and imaginary parts separately).
    pub fn z_scores_complex(&self, expected: &[Complex64]) -> Result<Vec<(f64, f64)>> {
        let re: Vec<f64> = expected.iter().map(|e| e.re).collect();
        let zr = self.z_scores(&re)?;
        Ok(zr
            .into_iter()
            .zip(&self.values)
            .zip(&self.std_err_imag)
            .zip(expected)
            .map(|(((zr, v), s), e)| (zr, (v.im - e.im) / s))
            .collect())
    }
}

/// Bartlett estimator of ∫dτ e^{−iΩτ}⟨x(t+τ)y(t)⟩ from non-overlapping
/// segments of length M, using the non-conjugated product X(Ω)·Y(−Ω)/T.
pub struct PeriodogramAccumulator {
    seg: usize,
    dt: f64,
    fft: Arc<dyn Fft<f64>>,
    sum: Vec<Complex64>,
    sum_sq_re: Vec<f64>,
    sum_sq_im: Vec<f64>,
    count: usize,
    bx: Vec<Complex64>,
    by: Vec<Complex64>,
}

impl std::fmt::Debug for PeriodogramAccumulator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PeriodogramAccumulator")
            .field("segment_len", &self.seg)
            .field("dt", &self.dt)
            .field("segments", &self.count)
            .finish()
    }
}

impl PeriodogramAccumulator {
    pub fn new(segment_len: usize, dt: f64) -> Result<Self> {
        if segment_len < 2 {
            return Err(Error::invalid("segments need at least 2 samples"));
        }
        if !(dt > 0.0) {
            return Err(Error::invalid(format!("sampling interval must be positive, got {dt}")));
        }
        let bins = segment_len / 2 + 1;
        Ok(Self {
            seg: segment_len,
            dt,
            fft: FftPlanner::new().plan_fft_forward(segment_len),
            sum: vec![Complex64::new(0.0, 0.0); bins],
            sum_sq_re: vec![0.0; bins],
            sum_sq_im: vec![0.0; bins],
            count: 0,
            bx: vec![Complex64::new(0.0, 0.0); segment_len],
            by: vec![Complex64::new(0.0, 0.0); segment_len],
        })
    }

    pub fn segments(&self) -> usize {
        self.count
    }

    pub fn add(&mut self, x: &[Complex64]) {
        self.add_pair(x, None)
    }

    pub fn add_cross(&mut self, x: &[Complex64], y: &[Complex64]) -> Result<()> {
        if x.len() != y.len() {
            return Err(Error::invalid(format!(
                "series lengths differ: {} and {}",
                x.len(),
                y.len()
            )));
        }
        self.add_pair(x, Some(y));
        Ok(())
    }

    /// Trailing samples that do not fill a segment are dropped.
    fn add_pair(&mut self, x: &[Complex64], y: Option<&[Complex64]>) {
        let m = self.seg;
        let t = m as f64 * self.dt;
        for s in 0..x.len() / m {
            let r = s * m..(s + 1) * m;
            self.bx.copy_from_slice(&x[r.clone()]);
            self.fft.process(&mut self.bx);
            if let Some(y) = y {
                self.by.copy_from_slice(&y[r]);
                self.fft.process(&mut self.by);
            }
            let yf = if y.is_some() { &self.by } else { &self.bx };
            for k in 0..self.sum.len() {
                let p = self.bx[k] * yf[(m - k) % m] * (self.dt * self.dt / t);
                self.sum[k] += p;
                self.sum_sq_re[k] += p.re * p.re;
                self.sum_sq_im[k] += p.im * p.im;
            }
            self.count += 1;
        }
    }

    pub fn finish(&self) -> Result<EstimatedSpectrum> {
        if self.count < MIN_SEGMENTS {
            return Err(Error::InsufficientData(format!(
                "{} segments of {} samples, need at least {MIN_SEGMENTS}",
                self.count, self.seg
            )));
        }
        let n = self.count as f64;
        let se = |sq: f64, mean: f64| ((sq - n * mean * mean).max(0.0) / (n - 1.0) / n).sqrt();
        let values: Vec<Complex64> = self.sum.iter().map(|s| s / n).collect();
        let t = self.seg as f64 * self.dt;
        Ok(EstimatedSpectrum {
            omega: (0..values.len()).map(|k| 2.0 * PI * k as f64 / t).collect(),
            std_err: values.iter().zip(&self.sum_sq_re).map(|(v, &q)| se(q, v.re)).collect(),
            std_err_imag: values.iter().zip(&self.sum_sq_im).map(|(v, &q)| se(q, v.im)).collect(),
            values,
            segments: self.count,
        })
    }
}

/// Mean of the periodogram of M samples spaced by `dt` for a stationary
/// process with correlation C(τ) = Σᵢ aᵢe^{λᵢ|τ|}:
/// dt·Σ_{|m|<M} (1 − |m|/M)·C(m·dt)·e^{−iΩm·dt}. This is the analytic
/// spectrum as seen through the finite segment and the sampling.
pub fn expected_periodogram(
    terms: &[(Complex64, Complex64)],
    dt: f64,
    segment_len: usize,
    omega: &[f64],
) -> Vec<Complex64> {
    let m = segment_len as f64;
    omega
        .iter()
        .map(|&w| {
            let mut total = Complex64::new(0.0, 0.0);
            for &(a, lambda) in terms {
                let r = (lambda * dt).exp();
                // Σ_{m≥1} (1 − m/M)(zᵐ + z̄ᵐ) with z = r·e^{−iΩdt}, z̄ = r·e^{iΩdt}
                let (zp, zm) = (r * Complex64::from_polar(1.0, -w * dt), r * Complex64::from_polar(1.0, w * dt));
                let (mut pp, mut pm) = (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0));
                let mut sum = Complex64::new(1.0, 0.0);
                for k in 1..segment_len {
                    pp *= zp;
                    pm *= zm;
                    sum += (pp + pm) * (1.0 - k as f64 / m);
                }
                total += a * sum;
            }
            total * dt
        })
        .collect()
}

/// Auto-spectrum of an ensemble of records sampled every `dt`.
pub fn estimate_spectrum(
    series: &[Vec<Complex64>],
    dt: f64,
    segment_len: usize,
) -> Result<EstimatedSpectrum> {
    let mut acc = PeriodogramAccumulator::new(segment_len, dt)?;
    for s in series {
        acc.add(s);
    }
    acc.finish()
}

/// Cross-spectrum of paired records (x from the first ensemble, y from the second).
pub fn estimate_cross_spectrum(
    x: &[Vec<Complex64>],
    y: &[Vec<Complex64>],
    dt: f64,
    segment_len: usize,
) -> Result<EstimatedSpectrum> {
    if x.len() != y.len() {
        return Err(Error::invalid("ensembles differ in size"));
    }
    let mut acc = PeriodogramAccumulator::new(segment_len, dt)?;
    for (a, b) in x.iter().zip(y) {
        acc.add_cross(a, b)?;
    }
    acc.finish()
}
