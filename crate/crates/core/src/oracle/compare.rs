use num_complex::Complex64;

use super::{expected_periodogram, simulate_grid, EstimatedSpectrum, GridOptions, GridSummary, PeriodogramAccumulator, SdeConfig};
use crate::error::{Error, Result};
use crate::linop::{EigenSystem, LinearOperatorMatrix};
use crate::model::FluctuationField;
use crate::soliton::SolitonProfile;
use crate::spectra::{homodyne_correlation, squeezing_spectrum, ModalDiffusionMatrix};

/// Sampling of a grid-space oracle run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSampling {
    /// Target interval between recorded homodyne samples (rounded to whole steps).
    pub record_interval: f64,
    /// Target interval between recorded soliton positions.
    pub position_interval: f64,
    /// Periodogram segment length in recorded samples.
    pub segment_len: usize,
    /// Highest frequency compared.
    pub omega_max: f64,
}

impl Default for OracleSampling {
    fn default() -> Self {
        Self { record_interval: 0.06, position_interval: 0.5, segment_len: 1024, omega_max: 10.0 }
    }
}

/// Stochastic and analytic spectra of one LOF on the periodogram bins.
#[derive(Debug, Clone, PartialEq)]
pub struct HomodyneComparison {
    pub label: String,
    /// S_out(Ω) from the modal sum.
    pub analytic: Vec<f64>,
    /// Mean of the estimator for the analytic correlation function, which
    /// differs from `analytic` by segment leakage and aliasing.
    pub expected: Vec<f64>,
    pub estimate: EstimatedSpectrum,
    pub z: Vec<f64>,
}

impl HomodyneComparison {
    pub fn max_abs_z(&self) -> f64 {
        self.z.iter().fold(0.0, |m, z| m.max(z.abs()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleRun {
    pub comparisons: Vec<HomodyneComparison>,
    /// Soliton position x₁ per trajectory, reset to zero after the transient.
    pub positions: Vec<Vec<Complex64>>,
    pub summary: GridSummary,
}

/// Runs the grid-space Langevin equations once and compares the homodyne
/// spectrum S = (2/‖α_L‖²)·∫dτ e^{−iΩτ}⟨E(t+τ)E(t)⟩, E = ⟨α_L|𝐚₁⟩, of every
/// LOF with the analytic modal sum. z-scores are taken against the
/// expected periodogram of the analytic correlation function.
pub fn homodyne_oracle(
    profile: &SolitonProfile,
    operators: &LinearOperatorMatrix,
    eigsys: &EigenSystem,
    d: &ModalDiffusionMatrix,
    config: &SdeConfig,
    lofs: &[(String, FluctuationField)],
    sampling: &OracleSampling,
) -> Result<OracleRun> {
    if lofs.is_empty() {
        return Err(Error::invalid("no LOF to compare"));
    }
    let every = |t: f64| ((t / config.dt).round() as usize).max(1);
    let options = GridOptions {
        probes: lofs.iter().map(|(_, f)| f.clone()).collect(),
        record_every: every(sampling.record_interval),
        position_every: every(sampling.position_interval),
        ..Default::default()
    };
    let dt_record = config.dt * options.record_every as f64;
    let mut acc = lofs
        .iter()
        .map(|_| PeriodogramAccumulator::new(sampling.segment_len, dt_record))
        .collect::<Result<Vec<_>>>()?;
    let mut positions = Vec::with_capacity(config.n_traj);
    let summary = simulate_grid(profile, operators, eigsys, config, &options, |t| {
        for (a, p) in acc.iter_mut().zip(&t.probes) {
            a.add(p);
        }
        positions.push(t.x1);
        Ok(())
    })?;

    let dx = profile.grid.dx();
    let mut comparisons = Vec::with_capacity(lofs.len());
    for ((label, lof), a) in lofs.iter().zip(&acc) {
        let norm: f64 = lof.upper.iter().map(|v| v.norm_sqr()).sum::<f64>() * dx;
        let full = a.finish()?.scaled(2.0 / norm);
        let bins = full.omega.iter().take_while(|&&w| w <= sampling.omega_max).count();
        let estimate = EstimatedSpectrum {
            omega: full.omega[..bins].to_vec(),
            values: full.values[..bins].to_vec(),
            std_err: full.std_err[..bins].to_vec(),
            std_err_imag: full.std_err_imag[..bins].to_vec(),
            segments: full.segments,
        };
        let analytic = squeezing_spectrum(eigsys, d, lof, &estimate.omega)?.values;
        let terms = homodyne_correlation(eigsys, d, lof)?;
        let expected: Vec<f64> = expected_periodogram(&terms, dt_record, sampling.segment_len, &estimate.omega)
            .iter()
            .map(|v| v.re)
            .collect();
        let z = estimate.z_scores(&expected)?;
        comparisons.push(HomodyneComparison { label: label.clone(), analytic, expected, estimate, z });
    }
    Ok(OracleRun { comparisons, positions, summary })
}

/// Least-squares line through the mean squared displacement.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftFit {
    pub lags: Vec<f64>,
    pub msd: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Fits Re⟨(x₁(t+τ) − x₁(t))²⟩ against τ for lags 1…`max_lag` samples,
/// averaging over trajectories and start times.
pub fn fit_drift(positions: &[Vec<Complex64>], dt: f64, max_lag: usize) -> Result<DriftFit> {
    if max_lag < 2 {
        return Err(Error::invalid("need at least two lags"));
    }
    let shortest = positions.iter().map(|p| p.len()).min().unwrap_or(0);
    if shortest <= max_lag {
        return Err(Error::InsufficientData(format!(
            "records of {shortest} samples for lags up to {max_lag}"
        )));
    }
    let mut lags = Vec::with_capacity(max_lag);
    let mut msd = Vec::with_capacity(max_lag);
    for lag in 1..=max_lag {
        let mut sum = Complex64::new(0.0, 0.0);
        let mut count = 0usize;
        for p in positions {
            for w in p.windows(lag + 1) {
                let step = w[lag] - w[0];
                sum += step * step;
                count += 1;
            }
        }
        lags.push(lag as f64 * dt);
        msd.push(sum.re / count as f64);
    }
    let n = lags.len() as f64;
    let mx = lags.iter().sum::<f64>() / n;
    let my = msd.iter().sum::<f64>() / n;
    let sxx: f64 = lags.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lags.iter().zip(&msd).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = lags.iter().zip(&msd).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let ss_tot: f64 = msd.iter().map(|y| (y - my).powi(2)).sum();
    Ok(DriftFit { lags, msd, slope, intercept, r_squared: 1.0 - ss_res / ss_tot })
}
