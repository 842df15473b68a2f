use std::f64::consts::PI;

use faer::Mat;
use num_complex::Complex64;

use super::diffusion::ModalDiffusionMatrix;
use super::{DetectorWindow, SpectrumResult, IMAG_TOLERANCE};
use crate::error::{Error, Result};
use crate::linop::EigenSystem;
use crate::model::FluctuationField;
use crate::soliton::SolitonProfile;

/// Relative projection below which a mode is dropped from the sum; such a
/// mode is not excited by the LOF and only contributes rounding noise, which
/// a (near-)zero eigenvalue would otherwise amplify.
const NEGLIGIBLE_PROJECTION: f64 = 1e-10;

#[derive(Debug, Clone, Default)]
pub struct SpectrumOptions {
    /// Accept LOFs whose lower component is not the conjugate of the upper
    /// one, and return the real part without enforcing realness.
    pub relaxed: bool,
    /// Descriptor copied into the result metadata.
    pub label: String,
}

#[derive(Clone)]
struct Projected {
    p: Vec<Complex64>,
    lambda: Vec<Complex64>,
    norm: f64,
}

fn project(
    eigsys: &EigenSystem,
    d: &ModalDiffusionMatrix,
    lof: &FluctuationField,
    weights: &[f64],
    relaxed: bool,
) -> Result<Projected> {
    let grid = eigsys.grid();
    grid.check_len(lof.len())?;
    if !relaxed && lof.conjugation_defect() > 1e-12 {
        return Err(Error::invalid(
            "LOF lower component must be the complex conjugate of the upper one",
        ));
    }
    let norm: f64 = lof.upper.iter().zip(weights).map(|(a, w)| a.norm_sqr() * w).sum();
    if !(norm > f64::MIN_POSITIVE) {
        return Err(Error::invalid("LOF has zero norm inside the detector"));
    }
    let p = projections(eigsys, d, lof, weights);
    let lambda = d.modes.iter().map(|&i| eigsys.eigenvalues()[i]).collect();
    Ok(Projected { p, lambda, norm })
}

/// ⟨α_L|vᵢ⟩ over the retained modes, with per-sample quadrature weights.
fn projections(
    eigsys: &EigenSystem,
    d: &ModalDiffusionMatrix,
    lof: &FluctuationField,
    weights: &[f64],
) -> Vec<Complex64> {
    let n = eigsys.grid().n();
    let right = eigsys.right_matrix();
    d.modes
        .iter()
        .map(|&i| {
            let col = right.col(i);
            (0..n)
                .map(|x| {
                    (lof.upper[x].conj() * col[x] + lof.lower[x].conj() * col[n + x]) * weights[x]
                })
                .sum()
        })
        .collect()
}

/// Mask of modes the LOF actually excites; fails if one of them is not damped.
fn excited(p: &[Complex64], lambda: &[Complex64], d: &ModalDiffusionMatrix) -> Result<Vec<bool>> {
    let pmax = p.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut mask = Vec::with_capacity(p.len());
    for (a, (l, p)) in lambda.iter().zip(p).enumerate() {
        let keep = p.norm() > NEGLIGIBLE_PROJECTION * pmax;
        if keep && l.re >= 0.0 {
            return Err(Error::NonStationary { index: d.modes[a], re: l.re });
        }
        mask.push(keep);
    }
    Ok(mask)
}

fn prune(pr: &mut Projected, d: &ModalDiffusionMatrix) -> Result<()> {
    let mask = excited(&pr.p, &pr.lambda, d)?;
    for (p, keep) in pr.p.iter_mut().zip(mask) {
        if !keep {
            *p = Complex64::new(0.0, 0.0);
        }
    }
    Ok(())
}

/// (2/N)·Σᵢⱼ pᵢpⱼDᵢⱼ/[(λᵢ−iΩ)(λⱼ+iΩ)] for each Ω, symmetrized in (i, j).
fn double_sum(pr: &Projected, entries: &Mat<Complex64>, omega: &[f64]) -> Vec<Complex64> {
    let m = pr.p.len();
    let f = omega.len();
    let a = Mat::<Complex64>::from_fn(m, f, |i, k| pr.p[i] / (pr.lambda[i] - Complex64::new(0.0, omega[k])));
    let b = Mat::<Complex64>::from_fn(m, f, |i, k| pr.p[i] / (pr.lambda[i] + Complex64::new(0.0, omega[k])));
    let db = entries * &b;
    let da = entries * &a;
    (0..f)
        .map(|k| {
            let s1: Complex64 = (0..m).map(|i| a[(i, k)] * db[(i, k)]).sum();
            let s2: Complex64 = (0..m).map(|i| b[(i, k)] * da[(i, k)]).sum();
            (s1 + s2) / pr.norm
        })
        .collect()
}

fn finish(
    eigsys: &EigenSystem,
    d: &ModalDiffusionMatrix,
    values: Vec<Complex64>,
    omega: &[f64],
    window: Option<DetectorWindow>,
    opts: &SpectrumOptions,
) -> Result<SpectrumResult> {
    let imag_residual = values.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
    if !opts.relaxed && imag_residual > IMAG_TOLERANCE {
        return Err(Error::Numerical(format!(
            "spectrum has imaginary residual {imag_residual:.3e}"
        )));
    }
    let label = if opts.label.is_empty() { "custom".to_string() } else { opts.label.clone() };
    Ok(SpectrumResult {
        omega: omega.to_vec(),
        values: values.iter().map(|v| v.re).collect(),
        imag_residual,
        lof: label,
        window,
        modes: d.len(),
        n_points: eigsys.grid().n(),
        length: eigsys.grid().length(),
    })
}

/// Squeezing spectrum with optional detector window and options.
pub fn squeezing_spectrum_with(
    eigsys: &EigenSystem,
    d: &ModalDiffusionMatrix,
    lof: &FluctuationField,
    window: Option<&DetectorWindow>,
    omega: &[f64],
    opts: &SpectrumOptions,
) -> Result<SpectrumResult> {
    let grid = eigsys.grid();
    let weights = match window {
        Some(w) => w.weights(grid)?,
        None => vec![grid.dx(); grid.n()],
    };
    let mut pr = project(eigsys, d, lof, &weights, opts.relaxed)?;
    prune(&mut pr, d)?;
    let values = double_sum(&pr, &d.entries, omega);
    finish(eigsys, d, values, omega, window.copied(), opts)
}

/// S_out(Ω) = (2/N)·Σᵢⱼ ⟨α_L|vᵢ⟩⟨α_L|vⱼ⟩·Sᵢⱼ(Ω) with N = ∫|α_L|²dx.
pub fn squeezing_spectrum(
    eigsys: &EigenSystem,
    d: &ModalDiffusionMatrix,
    lof: &FluctuationField,
    omega: &[f64],
) -> Result<SpectrumResult> {
    squeezing_spectrum_with(eigsys, d, lof, None, omega, &SpectrumOptions::default())
}

/// Stationary homodyne correlation (2/N)·⟨E(t+τ)E(t)⟩ = Σᵢ aᵢe^{λᵢ|τ|} of
/// E = ⟨α_L|𝐚₁⟩, returned as (aᵢ, λᵢ) over the excited modes. Its Fourier
/// transform Σᵢ aᵢ·(−2λᵢ)/(λᵢ² + Ω²) is S_out(Ω).
pub fn homodyne_correlation(
    eigsys: &EigenSystem,
    d: &ModalDiffusionMatrix,
    lof: &FluctuationField,
) -> Result<Vec<(Complex64, Complex64)>> {
    let grid = eigsys.grid();
    let mut pr = project(eigsys, d, lof, &vec![grid.dx(); grid.n()], false)?;
    prune(&mut pr, d)?;
    let m = pr.p.len();
    Ok((0..m)
        .filter(|&i| pr.p[i].norm() > 0.0)
        .map(|i| {
            let s: Complex64 = (0..m)
                .map(|j| pr.p[j] * d.entries[(i, j)] / (-pr.lambda[i] - pr.lambda[j]))
                .sum();
            (2.0 * pr.p[i] * s / pr.norm, pr.lambda[i])
        })
        .collect())
}

/// S_out at a single frequency.
pub fn squeeze_at(
    eigsys: &EigenSystem,
    d: &ModalDiffusionMatrix,
    lof: &FluctuationField,
    omega: f64,
) -> Result<f64> {
    Ok(squeezing_spectrum(eigsys, d, lof, &[omega])?.values[0])
}

/// Squeezing spectrum with projections and N restricted to the detector window.
pub fn squeezing_spectrum_detector(
    eigsys: &EigenSystem,
    d: &ModalDiffusionMatrix,
    lof: &FluctuationField,
    window: &DetectorWindow,
    omega: &[f64],
) -> Result<SpectrumResult> {
    squeezing_spectrum_with(eigsys, d, lof, Some(window), omega, &SpectrumOptions::default())
}

/// Squeezing spectrum keeping only the `m` modes with the largest
/// |⟨α_L|vᵢ⟩|·|Dᵢᵢ|^{1/2}.
pub fn squeezing_spectrum_truncated(
    eigsys: &EigenSystem,
    d: &ModalDiffusionMatrix,
    lof: &FluctuationField,
    omega: &[f64],
    m: usize,
) -> Result<SpectrumResult> {
    let grid = eigsys.grid();
    let weights = vec![grid.dx(); grid.n()];
    let full = project(eigsys, d, lof, &weights, false)?;
    let mut order: Vec<usize> = (0..d.len()).collect();
    let weight = |a: usize| full.p[a].norm() * d.entries[(a, a)].norm().sqrt();
    order.sort_by(|&a, &b| weight(b).total_cmp(&weight(a)));
    order.truncate(m.min(d.len()));
    order.sort_unstable();
    let mut pr = Projected {
        p: order.iter().map(|&a| full.p[a]).collect(),
        lambda: order.iter().map(|&a| full.lambda[a]).collect(),
        norm: full.norm,
    };
    let sub = ModalDiffusionMatrix {
        entries: Mat::<Complex64>::from_fn(order.len(), order.len(), |i, j| d.entries[(order[i], order[j])]),
        modes: order.iter().map(|&a| d.modes[a]).collect(),
    };
    prune(&mut pr, &sub)?;
    let values = double_sum(&pr, &sub.entries, omega);
    let opts = SpectrumOptions { relaxed: true, label: format!("truncated to {} modes", sub.len()) };
    finish(eigsys, &sub, values, omega, None, &opts)
}

/// Intensity-fluctuation spectrum: the squeezing spectrum with the classical
/// soliton (ψ̄, ψ̄*) as local oscillator.
pub fn intensity_spectrum(
    eigsys: &EigenSystem,
    d: &ModalDiffusionMatrix,
    profile: &SolitonProfile,
    window: Option<&DetectorWindow>,
    omega: &[f64],
) -> Result<SpectrumResult> {
    if profile.psi_bar.iter().all(|p| p.norm() == 0.0) {
        return Err(Error::invalid("zero classical profile"));
    }
    let lof = FluctuationField::conjugate_pair(profile.psi_bar.clone());
    let opts = SpectrumOptions { relaxed: false, label: "soliton-profile".into() };
    squeezing_spectrum_with(eigsys, d, &lof, window, omega, &opts)
}

/// S(θ) at one frequency for the plane-wave LOF α_L = e^{iθ}, reduced to
/// S(θ) = (2/N)[e^{−2iθ}Q_uu + Q_ul + Q_lu + e^{2iθ}Q_ll].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseCurve {
    q_uu: Complex64,
    q_mixed: Complex64,
    q_ll: Complex64,
    norm: f64,
}

impl PhaseCurve {
    pub fn eval(&self, theta: f64) -> f64 {
        let e = Complex64::from_polar(1.0, 2.0 * theta);
        (2.0 * (self.q_uu / e + self.q_mixed + self.q_ll * e) / self.norm).re
    }

    /// Imaginary part of the quadratic form at θ.
    pub fn eval_imag(&self, theta: f64) -> f64 {
        let e = Complex64::from_polar(1.0, 2.0 * theta);
        (2.0 * (self.q_uu / e + self.q_mixed + self.q_ll * e) / self.norm).im
    }
}

pub fn plane_wave_phase_curve(
    eigsys: &EigenSystem,
    d: &ModalDiffusionMatrix,
    window: Option<&DetectorWindow>,
    omega: f64,
) -> Result<PhaseCurve> {
    let grid = eigsys.grid();
    let n = grid.n();
    let weights = match window {
        Some(w) => w.weights(grid)?,
        None => vec![grid.dx(); n],
    };
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let upper = FluctuationField::new(vec![one; n], vec![zero; n])?;
    let lower = FluctuationField::new(vec![zero; n], vec![one; n])?;
    let mut pu = project(eigsys, d, &upper, &weights, true)?;
    let mut pl = Projected { p: projections(eigsys, d, &lower, &weights), ..pu.clone() };
    let size: Vec<Complex64> =
        pu.p.iter().zip(&pl.p).map(|(a, b)| Complex64::new(a.norm() + b.norm(), 0.0)).collect();
    let mask = excited(&size, &pu.lambda, d)?;
    for (a, keep) in mask.into_iter().enumerate() {
        if !keep {
            pu.p[a] = Complex64::new(0.0, 0.0);
            pl.p[a] = Complex64::new(0.0, 0.0);
        }
    }
    let iw = Complex64::new(0.0, omega);
    let m = d.len();
    let form = |x: &[Complex64], y: &[Complex64]| -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        for j in 0..m {
            let yj = y[j] / (pu.lambda[j] + iw);
            let mut col = Complex64::new(0.0, 0.0);
            for i in 0..m {
                col += x[i] / (pu.lambda[i] - iw) * d.entries[(i, j)];
            }
            s += col * yj;
        }
        s
    };
    Ok(PhaseCurve {
        q_uu: form(&pu.p, &pu.p),
        q_mixed: form(&pu.p, &pl.p) + form(&pl.p, &pu.p),
        q_ll: form(&pl.p, &pl.p),
        norm: pu.norm,
    })
}

/// Plane-wave LOF phase minimizing S at one frequency: a uniform scan of
/// θ ∈ [0, π) followed by golden-section refinement to 1e−6.
pub fn optimize_lof_phase(
    eigsys: &EigenSystem,
    d: &ModalDiffusionMatrix,
    window: Option<&DetectorWindow>,
    omega: f64,
) -> Result<(f64, f64)> {
    let curve = plane_wave_phase_curve(eigsys, d, window, omega)?;
    Ok(minimize_periodic(|t| curve.eval(t), PI, 360, 1e-6))
}

/// Minimizes a `period`-periodic function by scan plus golden section.
pub(crate) fn minimize_periodic(f: impl Fn(f64) -> f64, period: f64, scan: usize, tol: f64) -> (f64, f64) {
    let h = period / scan as f64;
    let (k, _) = (0..scan)
        .map(|k| (k, f(k as f64 * h)))
        .fold((0, f64::INFINITY), |acc, (k, v)| if v < acc.1 { (k, v) } else { acc });
    let (t, v) = golden_section(&f, (k as f64 - 1.0) * h, (k as f64 + 1.0) * h, tol);
    (t.rem_euclid(period), v)
}

pub(crate) fn golden_section(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let t = 0.5 * (a + b);
    (t, f(t))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_section_finds_parabola_minimum() {
        let (t, v) = golden_section(&|x: f64| (x - 0.3).powi(2) + 1.0, 0.0, 1.0, 1e-9);
        // f is flat to rounding within ~sqrt(eps) of the minimum
        assert!((t - 0.3).abs() < 1e-7);
        assert!((v - 1.0).abs() < 1e-14);
    }

    #[test]
    fn periodic_minimizer_wraps() {
        let (t, v) = minimize_periodic(|x| (2.0 * (x - 3.1)).cos(), PI, 360, 1e-9);
        let expect = (3.1 + PI / 2.0).rem_euclid(PI);
        assert!((t - expect).abs() < 1e-6, "{t} vs {expect}");
        assert!((v + 1.0).abs() < 1e-12);
    }
}
