//! Closed-form discrete eigenvectors at the tangent bifurcation μ = 1,
//! where β² = Δ₁ and φ = 0. With 𝒮 = √(β/2)·sech(βx) and 𝒯 = β·tanh(βx):
//!
//! λ = 0:  v₁ = −𝒮𝒯(e^{iφ}, e^{−iφ}),  w₁ = −𝒮((x+i𝒯)e^{iφ}, (x−i𝒯)e^{−iφ}),
//!         v₄ = iβ^{−1/2}𝒮([β²+i(x𝒯−1)]e^{iφ}, −[β²−i(x𝒯−1)]e^{−iφ}),
//!         w₄ = β^{1/2}𝒮(e^{iφ}, e^{−iφ});
//! λ = −2: v₂ = −iβ^{1/2}𝒮((x+i𝒯)e^{iφ}, −(x−i𝒯)e^{−iφ}),
//!         w₂ = −iβ^{−1/2}𝒮𝒯(e^{iφ}, −e^{−iφ}),
//!         v₃ = iβ𝒮(e^{iφ}, −e^{−iφ}),
//!         w₃ = −β^{−1}𝒮([β²+i(x𝒯−1)]e^{iφ}, [β²−i(x𝒯−1)]e^{−iφ}).

use faer::Mat;
use num_complex::Complex64;

use super::eigen::{EigenSystem, ModeTag, Parity};
use crate::error::{Error, Result};
use crate::model::{Grid1D, ModelParams};

/// (v, v⁺, w, w⁺) samples of the four closed-form pairs at one point.
struct Samples([[Complex64; 4]; 4]);

impl std::ops::Add for Samples {
    type Output = Samples;

    fn add(mut self, rhs: Samples) -> Samples {
        for (a, b) in self.0.iter_mut().flatten().zip(rhs.0.iter().flatten()) {
            *a += b;
        }
        self
    }
}

/// The four closed-form mode pairs (v₁,w₁) … (v₄,w₄) in that order, with
/// eigenvalues {0, −2, −2, 0}. Requires μ = 1.
pub fn analytic_modes_mu1(params: &ModelParams, grid: &Grid1D) -> Result<EigenSystem> {
    if (params.mu - 1.0).abs() > 1e-12 {
        return Err(Error::invalid(format!(
            "closed-form modes exist only at mu = 1, got {}",
            params.mu
        )));
    }
    if params.delta1 <= 0.0 {
        return Err(Error::invalid("closed-form modes need delta1 > 0"));
    }
    let beta = params.delta1.sqrt();
    let e = Complex64::new(1.0, 0.0);
    let ec = e.conj();
    let i = Complex64::i();
    let b2 = beta * beta;
    let rb = beta.sqrt();
    let n = grid.n();

    let mut right = Mat::<Complex64>::zeros(2 * n, 4);
    let mut left = Mat::<Complex64>::zeros(2 * n, 4);
    let modes = |x: f64| {
        let s = (beta / 2.0).sqrt() / (beta * x).cosh();
        let t = beta * (beta * x).tanh();
        let xp = Complex64::new(x, t);
        let xm = Complex64::new(x, -t);
        let bp = Complex64::new(b2, x * t - 1.0);
        let bm = Complex64::new(b2, -(x * t - 1.0));
        Samples([
            [(-s * t) * e, (-s * t) * ec, -s * xp * e, -s * xm * ec],
            [-i * rb * s * xp * e, i * rb * s * xm * ec, -i / rb * s * t * e, i / rb * s * t * ec],
            [i * beta * s * e, -i * beta * s * ec, -s / beta * bp * e, -s / beta * bm * ec],
            [i / rb * s * bp * e, -i / rb * s * bm * ec, rb * s * e, rb * s * ec],
        ])
    };
    for (j, Samples(vals)) in grid.sample_periodized(modes).into_iter().enumerate() {
        for (m, [vu, vl, wu, wl]) in vals.into_iter().enumerate() {
            right[(j, m)] = vu;
            right[(n + j, m)] = vl;
            left[(j, m)] = wu;
            left[(n + j, m)] = wl;
        }
    }
    let z = Complex64::new(0.0, 0.0);
    let m2 = Complex64::new(-2.0, 0.0);
    Ok(EigenSystem::from_parts(
        grid.clone(),
        vec![z, m2, m2, z],
        right,
        left,
        vec![ModeTag::Goldstone, ModeTag::Momentum, ModeTag::Generic, ModeTag::Bifurcating],
        vec![Some(Parity::Odd), Some(Parity::Odd), Some(Parity::Even), Some(Parity::Even)],
    )
    .with_classical(
        grid.sample_periodized(|x| Complex64::new(2f64.sqrt() * beta / (beta * x).cosh(), 0.0)),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linop::operator::build_operators;
    use crate::model::{make_grid, scalar_product};
    use crate::soliton::{soliton_profile, Branch};

    fn setup() -> (ModelParams, Grid1D) {
        (ModelParams::focusing(1.0, 1.2).unwrap(), make_grid(512, 40.0).unwrap())
    }

    #[test]
    fn closed_forms_are_biorthonormal() {
        let (p, g) = setup();
        let sys = analytic_modes_mu1(&p, &g).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                let ip = scalar_product(&sys.left_mode(a), &sys.right_mode(b), &g).unwrap();
                let e = if a == b { 1.0 } else { 0.0 };
                assert!((ip - e).norm() < 1e-8, "<w{}|v{}> = {ip}", a + 1, b + 1);
            }
        }
    }

    #[test]
    fn closed_forms_are_eigenvectors() {
        let (p, g) = setup();
        let sys = analytic_modes_mu1(&p, &g).unwrap();
        let prof = soliton_profile(&p, &g, Branch::Plus).unwrap();
        let (l, ld) = build_operators(&prof).unwrap();
        for m in 0..4 {
            let lam = sys.eigenvalues()[m];
            let v = sys.right_mode(m);
            let r = l.apply(&v).unwrap().add(&v.scale(-lam));
            assert!(r.max_abs() < 1e-7 * v.max_abs(), "v{}: {}", m + 1, r.max_abs());
            let w = sys.left_mode(m);
            let r = ld.apply(&w).unwrap().add(&w.scale(-lam.conj()));
            assert!(r.max_abs() < 1e-7 * w.max_abs(), "w{}: {}", m + 1, r.max_abs());
        }
    }

    #[test]
    fn rejects_mu_away_from_one() {
        let g = make_grid(64, 40.0).unwrap();
        let p = ModelParams::focusing(1.1, 1.2).unwrap();
        assert!(matches!(analytic_modes_mu1(&p, &g), Err(Error::InvalidArgument(_))));
    }
}
