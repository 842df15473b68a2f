//! Local-oscillator fields (LOFs) for homodyne projection.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linop::{EigenSystem, ModeTag};
use crate::model::{FluctuationField, Grid1D};
use crate::spectra::{squeeze_at, ModalDiffusionMatrix};
use crate::soliton::SolitonProfile;

/// Which eigensystem modes a mode-derived LOF is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeSelector {
    /// Every mode carrying the tag.
    Tag(ModeTag),
    /// The λ ↦ −2 − λ partners of every mode carrying the tag.
    PartnerOf(ModeTag),
    Index(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub enum LofKind {
    /// α_L = e^{iθ}.
    PlaneWave { theta: f64 },
    /// GH₁(x) = i·e^{iφ}·(x − x_shift)·exp(−½((x − x_shift)/ξ)²); φ defaults to the soliton phase.
    GaussHermite { xi: f64, x_shift: f64, phi: Option<f64> },
    /// Σₖ cₖ·w_k over the left eigenvectors picked by the selector (all
    /// coefficients 1 when `coefficients` is empty).
    ModeDerived { selector: ModeSelector, coefficients: Vec<Complex64> },
    /// Closed-form λ = −2 left mode w₃ of the tangent bifurcation, evaluated
    /// with the given (β, φ).
    ClosedFormW3 { beta: f64, phi: f64 },
    /// The classical soliton (ψ̄, ψ̄*).
    SolitonProfile,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LofSpec {
    pub kind: LofKind,
}

impl LofSpec {
    pub fn new(kind: LofKind) -> Self {
        Self { kind }
    }

    pub fn label(&self) -> String {
        match &self.kind {
            LofKind::PlaneWave { theta } => format!("plane-wave(theta={theta})"),
            LofKind::GaussHermite { xi, x_shift, .. } => format!("gh1(xi={xi}, shift={x_shift})"),
            LofKind::ModeDerived { selector, .. } => match selector {
                ModeSelector::Tag(t) => format!("mode({})", t.as_str()),
                ModeSelector::PartnerOf(t) => format!("partner-of({})", t.as_str()),
                ModeSelector::Index(i) => format!("mode(#{i})"),
            },
            LofKind::ClosedFormW3 { beta, phi } => format!("w3(beta={beta}, phi={phi})"),
            LofKind::SolitonProfile => "soliton-profile".into(),
        }
    }
}

fn resolve(selector: ModeSelector, eigsys: &EigenSystem) -> Result<Vec<usize>> {
    let picked = match selector {
        ModeSelector::Tag(t) => eigsys.indices_of(t),
        ModeSelector::PartnerOf(t) => eigsys
            .indices_of(t)
            .into_iter()
            .filter_map(|i| eigsys.partner(i))
            .collect(),
        ModeSelector::Index(i) if i < eigsys.len() => vec![i],
        ModeSelector::Index(i) => {
            return Err(Error::invalid(format!("mode index {i} out of range")));
        }
    };
    if picked.is_empty() {
        return Err(Error::invalid(format!("no mode matches {selector:?}")));
    }
    Ok(picked)
}

/// Closed-form w₃ = −β⁻¹𝒮([β²+i(x𝒯−1)]e^{iφ}, [β²−i(x𝒯−1)]e^{−iφ}).
pub fn closed_form_w3(beta: f64, phi: f64, grid: &Grid1D) -> FluctuationField {
    let e = Complex64::from_polar(1.0, phi);
    let upper = grid.sample_periodized(|x| {
        let s = (beta / 2.0).sqrt() / (beta * x).cosh();
        let t = beta * (beta * x).tanh();
        -s / beta * Complex64::new(beta * beta, x * t - 1.0) * e
    });
    FluctuationField::conjugate_pair(upper)
}

pub fn render_lof(
    spec: &LofSpec,
    profile: &SolitonProfile,
    eigsys: Option<&EigenSystem>,
) -> Result<FluctuationField> {
    let grid = &profile.grid;
    match &spec.kind {
        LofKind::PlaneWave { theta } => Ok(FluctuationField::conjugate_pair(vec![
            Complex64::from_polar(1.0, *theta);
            grid.n()
        ])),
        LofKind::GaussHermite { xi, x_shift, phi } => {
            if !(*xi > 0.0) {
                return Err(Error::invalid(format!("Gauss-Hermite width must be positive, got {xi}")));
            }
            let amp = Complex64::i() * Complex64::from_polar(1.0, phi.unwrap_or(profile.phi));
            Ok(FluctuationField::conjugate_pair(
                grid.x()
                    .iter()
                    .map(|&x| {
                        let u = x - x_shift;
                        amp * u * (-0.5 * (u / xi).powi(2)).exp()
                    })
                    .collect(),
            ))
        }
        LofKind::ModeDerived { selector, coefficients } => {
            let eigsys = eigsys.ok_or_else(|| Error::invalid("mode-derived LOF needs an eigensystem"))?;
            let modes = resolve(*selector, eigsys)?;
            if !coefficients.is_empty() && coefficients.len() != modes.len() {
                return Err(Error::invalid(format!(
                    "{} coefficients for {} selected modes",
                    coefficients.len(),
                    modes.len()
                )));
            }
            let mut out = FluctuationField::zeros(grid.n());
            for (k, &m) in modes.iter().enumerate() {
                let c = coefficients.get(k).copied().unwrap_or(Complex64::new(1.0, 0.0));
                out = out.add(&eigsys.left_mode(m).scale(c));
            }
            Ok(out)
        }
        LofKind::ClosedFormW3 { beta, phi } => Ok(closed_form_w3(*beta, *phi, grid)),
        LofKind::SolitonProfile => Ok(FluctuationField::conjugate_pair(profile.psi_bar.clone())),
    }
}

/// S_out(Ω) of Gauss–Hermite LOFs across widths (at zero shift) or shifts.
#[derive(Debug, Clone, PartialEq)]
pub struct GhScan {
    pub omega: f64,
    /// Scanned parameter values (ξ or x_shift).
    pub parameter: Vec<f64>,
    /// S_out, NaN where the LOF vanishes on the grid.
    pub s: Vec<f64>,
}

fn gh_value(
    profile: &SolitonProfile,
    eigsys: &EigenSystem,
    d: &ModalDiffusionMatrix,
    xi: f64,
    x_shift: f64,
    omega: f64,
) -> Result<f64> {
    let lof = render_lof(
        &LofSpec::new(LofKind::GaussHermite { xi, x_shift, phi: None }),
        profile,
        None,
    )?;
    match squeeze_at(eigsys, d, &lof, omega) {
        Ok(v) => Ok(v),
        Err(Error::InvalidArgument(_)) => Ok(f64::NAN),
        Err(e) => Err(e),
    }
}

pub fn gh_width_scan(
    profile: &SolitonProfile,
    eigsys: &EigenSystem,
    d: &ModalDiffusionMatrix,
    xi_values: &[f64],
    omega: f64,
) -> Result<GhScan> {
    let s = xi_values
        .iter()
        .map(|&xi| gh_value(profile, eigsys, d, xi, 0.0, omega))
        .collect::<Result<_>>()?;
    Ok(GhScan { omega, parameter: xi_values.to_vec(), s })
}

pub fn gh_shift_scan(
    profile: &SolitonProfile,
    eigsys: &EigenSystem,
    d: &ModalDiffusionMatrix,
    xi: f64,
    shifts: &[f64],
    omega: f64,
) -> Result<GhScan> {
    let s = shifts
        .iter()
        .map(|&x0| gh_value(profile, eigsys, d, xi, x0, omega))
        .collect::<Result<_>>()?;
    Ok(GhScan { omega, parameter: shifts.to_vec(), s })
}

/// Width ξ ∈ [0.1/β, 10/β] minimizing S_out(Ω) at zero shift, with its S value.
pub fn optimal_gh_width(
    profile: &SolitonProfile,
    eigsys: &EigenSystem,
    d: &ModalDiffusionMatrix,
    omega: f64,
) -> Result<(f64, f64)> {
    let (lo, hi) = ((0.1 / profile.beta).ln(), (10.0 / profile.beta).ln());
    let f = |t: f64| {
        gh_value(profile, eigsys, d, t.exp(), 0.0, omega)
            .ok()
            .filter(|v| v.is_finite())
            .unwrap_or(f64::INFINITY)
    };
    let steps = 60;
    let h = (hi - lo) / steps as f64;
    let (k, _) = (0..=steps)
        .map(|k| (k, f(lo + k as f64 * h)))
        .fold((0, f64::INFINITY), |acc, (k, v)| if v < acc.1 { (k, v) } else { acc });
    let a = lo + (k as f64 - 1.0).max(0.0) * h;
    let b = lo + (k as f64 + 1.0).min(steps as f64) * h;
    let (t, v) = crate::spectra::golden_section(&f, a, b, 1e-6);
    Ok((t.exp(), v))
}
