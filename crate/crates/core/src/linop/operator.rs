//! Dense spectral discretization of the linear fluctuation operator
//!
//! 𝓛 = [[𝓛₁, ᾱ₀], [ᾱ₀*, 𝓛₁*]],   𝓛₁ = −(1+iΔ₁) + i∂ₓ² + 2iσ|ψ̄|²,
//!
//! and of its adjoint 𝓛† = [[𝓛₁*, ᾱ₀], [ᾱ₀*, 𝓛₁]].

use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{FluctuationField, Grid1D, ModelParams};
use crate::soliton::SolitonProfile;

/// Minimum number of grid points across the soliton FWHM.
pub const MIN_POINTS_PER_WIDTH: f64 = 8.0;
/// Largest tolerated |ψ̄| at the domain edge relative to the peak.
pub const MAX_EDGE_RATIO: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct Alpha0Field {
    pub values: Vec<Complex64>,
}

/// ᾱ₀(x) = μ + iσψ̄²(x).
pub fn alpha0(profile: &SolitonProfile) -> Alpha0Field {
    alpha0_from_field(&profile.params, &profile.psi_bar)
}

pub fn alpha0_from_field(params: &ModelParams, psi: &[Complex64]) -> Alpha0Field {
    let s = params.sigma.value();
    let values = psi
        .iter()
        .map(|p| params.mu + Complex64::new(0.0, s) * p * p)
        .collect();
    Alpha0Field { values }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    L,
    LAdjoint,
}

/// A dense 2N×2N operator acting on stacked (upper, lower) samples, together
/// with the classical field it was linearized around.
#[derive(Debug, Clone)]
pub struct LinearOperatorMatrix {
    pub matrix: Mat<Complex64>,
    pub kind: OperatorKind,
    pub params: ModelParams,
    pub grid: Grid1D,
    pub psi_bar: Vec<Complex64>,
}

impl LinearOperatorMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn apply(&self, f: &FluctuationField) -> Result<FluctuationField> {
        let n = self.grid.n();
        self.grid.check_len(f.len())?;
        let v = f.to_stacked();
        let mut out = vec![Complex64::new(0.0, 0.0); 2 * n];
        for (j, &vj) in v.iter().enumerate() {
            if vj == Complex64::new(0.0, 0.0) {
                continue;
            }
            let col = self.matrix.col(j);
            for (o, &m) in out.iter_mut().zip(col.iter()) {
                *o += m * vj;
            }
        }
        Ok(FluctuationField::from_stacked(&out))
    }
}

/// Builds 𝓛 and 𝓛† around the soliton, after checking that the grid resolves it.
pub fn build_operators(
    profile: &SolitonProfile,
) -> Result<(LinearOperatorMatrix, LinearOperatorMatrix)> {
    let per_width = profile.width() / profile.grid.dx();
    if per_width < MIN_POINTS_PER_WIDTH {
        return Err(Error::Resolution(format!(
            "{per_width:.2} points per soliton width (beta = {}), need at least {MIN_POINTS_PER_WIDTH}",
            profile.beta
        )));
    }
    if profile.edge_ratio() > MAX_EDGE_RATIO {
        return Err(Error::Resolution(format!(
            "domain too small: edge amplitude ratio {:.3e}",
            profile.edge_ratio()
        )));
    }
    build_operators_from_field(&profile.params, &profile.grid, &profile.psi_bar)
}

/// Builds 𝓛 and 𝓛† around an arbitrary classical field on the grid.
pub fn build_operators_from_field(
    params: &ModelParams,
    grid: &Grid1D,
    psi: &[Complex64],
) -> Result<(LinearOperatorMatrix, LinearOperatorMatrix)> {
    grid.check_len(psi.len())?;
    let n = grid.n();
    let kernel = grid.laplacian_kernel();
    let a0 = alpha0_from_field(params, psi);
    let s = params.sigma.value();
    let i = Complex64::i();
    let diag: Vec<Complex64> = psi
        .iter()
        .map(|p| -Complex64::new(1.0, params.delta1) + i * (2.0 * s * p.norm_sqr()))
        .collect();
    // 𝓛₁[r][c] = diag_r δ_rc + i·D2[r][c], D2 circulant and real symmetric.
    let l1 = |r: usize, c: usize| {
        let d2 = kernel[(r + n - c) % n];
        let mut v = i * d2;
        if r == c {
            v += diag[r];
        }
        v
    };
    let build = |adjoint: bool| {
        Mat::<Complex64>::from_fn(2 * n, 2 * n, |r, c| {
            let (br, rr) = (r / n, r % n);
            let (bc, cc) = (c / n, c % n);
            match (br, bc) {
                (0, 0) => {
                    let v = l1(rr, cc);
                    if adjoint {
                        v.conj()
                    } else {
                        v
                    }
                }
                (1, 1) => {
                    let v = l1(rr, cc);
                    if adjoint {
                        v
                    } else {
                        v.conj()
                    }
                }
                (0, 1) if rr == cc => a0.values[rr],
                (1, 0) if rr == cc => a0.values[rr].conj(),
                _ => Complex64::new(0.0, 0.0),
            }
        })
    };
    let mk = |kind| LinearOperatorMatrix {
        matrix: build(kind == OperatorKind::LAdjoint),
        kind,
        params: *params,
        grid: grid.clone(),
        psi_bar: psi.to_vec(),
    };
    Ok((mk(OperatorKind::L), mk(OperatorKind::LAdjoint)))
}

/// Goldstone vector 𝐆ₓ = ∂ₓ(ψ̄, ψ̄*).
pub fn goldstone_vector(profile: &SolitonProfile) -> FluctuationField {
    FluctuationField::conjugate_pair(profile.dpsi_bar.clone())
}

/// Adjoint momentum vector ∂ₓ(iψ̄, −iψ̄*).
pub fn momentum_vector(profile: &SolitonProfile) -> FluctuationField {
    let i = Complex64::i();
    FluctuationField::conjugate_pair(profile.dpsi_bar.iter().map(|d| i * d).collect())
}

/// Eigenvalues −1 ± √(μ² − (Δ₁+k²)²) of the trivial-background operator.
pub fn background_eigenvalues(params: &ModelParams, k: f64) -> [Complex64; 2] {
    let dk = params.delta1 + k * k;
    let root = Complex64::new(params.mu * params.mu - dk * dk, 0.0).sqrt();
    [Complex64::new(-1.0, 0.0) + root, Complex64::new(-1.0, 0.0) - root]
}
