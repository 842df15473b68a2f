//! Location of the Hopf bifurcation of the bright soliton on a Δ₁ = const line.

use num_complex::Complex64;

use super::eigen::spectrum;
use super::operator::build_operators;
use crate::error::{Error, Result};
use crate::model::{Grid1D, ModelParams};
use crate::soliton::{soliton_profile, Branch};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopfPoint {
    pub delta1: f64,
    pub mu: f64,
    /// |Im λ| of the crossing pair.
    pub omega: f64,
    /// Re λ of the crossing pair at the returned μ.
    pub re_lambda: f64,
}

/// Largest Re λ among complex eigenvalues of 𝓛, with the matching |Im λ|.
pub fn oscillatory_growth(params: &ModelParams, grid: &Grid1D) -> Result<(f64, f64)> {
    let profile = soliton_profile(params, grid, Branch::Plus)?;
    let (l, _) = build_operators(&profile)?;
    let lam: Vec<Complex64> = spectrum(&l)?.into_iter().map(|(l, _)| l).collect();
    lam.iter()
        .filter(|l| l.im.abs() > 1e-9)
        .max_by(|a, b| a.re.total_cmp(&b.re))
        .map(|l| (l.re, l.im.abs()))
        .ok_or_else(|| Error::Classification("spectrum has no complex eigenvalues".into()))
}

/// Finds μ_HB in `mu_bracket` where a complex pair crosses Re λ = 0, by
/// Illinois false position on the largest oscillatory growth rate.
pub fn find_hopf_threshold(delta1: f64, mu_bracket: (f64, f64), grid: &Grid1D) -> Result<HopfPoint> {
    let (mut lo, mut hi) = mu_bracket;
    if !(lo < hi) {
        return Err(Error::invalid(format!("empty bracket [{lo}, {hi}]")));
    }
    let eval = |mu: f64| oscillatory_growth(&ModelParams::focusing(mu, delta1)?, grid);
    let (mut flo, _) = eval(lo)?;
    let (mut fhi, _) = eval(hi)?;
    if flo.signum() == fhi.signum() {
        return Err(Error::NoCrossing { lo, hi });
    }
    let mut side = 0i8;
    for _ in 0..100 {
        let mu = (lo * fhi - hi * flo) / (fhi - flo);
        let (f, omega) = eval(mu)?;
        if f.abs() < 1e-9 || hi - lo < 1e-13 {
            return Ok(HopfPoint { delta1, mu, omega, re_lambda: f });
        }
        if f.signum() == flo.signum() {
            lo = mu;
            flo = f;
            if side == -1 {
                fhi *= 0.5;
            }
            side = -1;
        } else {
            hi = mu;
            fhi = f;
            if side == 1 {
                flo *= 0.5;
            }
            side = 1;
        }
    }
    Err(Error::Numerical("Hopf threshold search did not converge".into()))
}
