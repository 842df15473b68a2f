//! Biorthonormal eigensystem of 𝓛 and 𝓛†.
//!
//! The swap-conjugation symmetry of 𝓛 makes it unitarily similar to a real
//! matrix R = Tᴴ𝓛T with T = [[I, iI], [I, −iI]]/√2, and an even classical
//! field makes R commute with the grid reflection. The eigenproblem is
//! therefore solved as two real problems, one per parity sector. Right
//! vectors come from R, left vectors from Rᵀ (the real form of 𝓛†), and the
//! two sets are paired by overlap.

use std::f64::consts::FRAC_1_SQRT_2;

use faer::linalg::solvers::DenseSolveCore;
use faer::linalg::solvers::Eigen;
use faer::Mat;
use num_complex::Complex64;

use super::operator::{LinearOperatorMatrix, OperatorKind};
use crate::error::{Error, Result};
use crate::model::{first_derivative, scalar_product, FluctuationField, Grid1D};

/// Overlap above which a mode is identified with the Goldstone or momentum shape.
pub const TAG_OVERLAP: f64 = 0.999;
/// Norm fraction inside |x| < L/4 above which a mode counts as localized.
pub const LOCALIZATION_THRESHOLD: f64 = 0.75;
/// Two candidate left modes closer than this relative overlap are ambiguous.
const PAIRING_AMBIGUITY: f64 = 1e-3;
/// Relative off-diagonal Gram entry that couples two pairs into one cluster.
const CLUSTER_COUPLING: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeTag {
    Goldstone,
    Momentum,
    Bifurcating,
    HopfPair,
    Generic,
}

impl ModeTag {
    pub fn as_str(self) -> &'static str {
        match self {
            ModeTag::Goldstone => "goldstone",
            ModeTag::Momentum => "momentum",
            ModeTag::Bifurcating => "bifurcating",
            ModeTag::HopfPair => "hopf-pair",
            ModeTag::Generic => "generic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

/// Eigenvalues with paired right (vᵢ) and left (wᵢ) eigenvectors stored as
/// columns of 2N×M matrices, normalized so that ⟨wᵢ|vⱼ⟩ = δᵢⱼ.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    grid: Grid1D,
    eigenvalues: Vec<Complex64>,
    right: Mat<Complex64>,
    left: Mat<Complex64>,
    tags: Vec<ModeTag>,
    parity: Vec<Option<Parity>>,
    localization: Vec<f64>,
    inverse_route_error: Option<f64>,
    classical: Option<Vec<Complex64>>,
}

fn column_field(m: &Mat<Complex64>, j: usize) -> FluctuationField {
    let col: Vec<Complex64> = m.col(j).iter().copied().collect();
    FluctuationField::from_stacked(&col)
}

fn localization_of(col: &[Complex64], grid: &Grid1D) -> f64 {
    let n = grid.n();
    let quarter = grid.length() / 4.0;
    let (mut inside, mut total) = (0.0, 0.0);
    for (idx, c) in col.iter().enumerate() {
        let w = c.norm_sqr();
        total += w;
        if grid.x()[idx % n].abs() < quarter {
            inside += w;
        }
    }
    if total > 0.0 {
        inside / total
    } else {
        0.0
    }
}

impl EigenSystem {
    pub(crate) fn from_parts(
        grid: Grid1D,
        eigenvalues: Vec<Complex64>,
        right: Mat<Complex64>,
        left: Mat<Complex64>,
        tags: Vec<ModeTag>,
        parity: Vec<Option<Parity>>,
    ) -> Self {
        let localization = (0..right.ncols())
            .map(|j| {
                let col: Vec<Complex64> = right.col(j).iter().copied().collect();
                localization_of(&col, &grid)
            })
            .collect();
        Self {
            grid,
            eigenvalues,
            right,
            left,
            tags,
            parity,
            localization,
            inverse_route_error: None,
            classical: None,
        }
    }

    pub(crate) fn with_classical(mut self, psi: Vec<Complex64>) -> Self {
        self.classical = Some(psi);
        self
    }

    /// The classical field ψ̄ the operator was linearized around, if known.
    pub fn classical_field(&self) -> Option<&[Complex64]> {
        self.classical.as_deref()
    }

    /// Left Goldstone vector rescaled so that ⟨w|𝐆ₓ⟩ = 1 with 𝐆ₓ = ∂ₓ(ψ̄, ψ̄*);
    /// its upper component is the w₁ entering the drift diffusion.
    pub fn goldstone_left_normalized(&self) -> Result<FluctuationField> {
        let g = self.goldstone()?;
        let psi = self
            .classical
            .as_ref()
            .ok_or_else(|| Error::Classification("eigensystem has no classical field".into()))?;
        let gx = FluctuationField::conjugate_pair(first_derivative(psi, &self.grid)?);
        let w = self.left_mode(g);
        let c = scalar_product(&w, &gx, &self.grid)?;
        if c.norm() == 0.0 {
            return Err(Error::Classification("goldstone left mode orthogonal to the shift".into()));
        }
        Ok(w.scale(Complex64::new(1.0, 0.0) / c.conj()))
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    pub fn tags(&self) -> &[ModeTag] {
        &self.tags
    }

    pub fn parity(&self, i: usize) -> Option<Parity> {
        self.parity[i]
    }

    /// Fraction of ‖vᵢ‖² inside |x| < L/4.
    pub fn localization(&self, i: usize) -> f64 {
        self.localization[i]
    }

    /// Right eigenvectors as columns of a 2N×M matrix.
    pub fn right_matrix(&self) -> &Mat<Complex64> {
        &self.right
    }

    /// Left eigenvectors as columns of a 2N×M matrix.
    pub fn left_matrix(&self) -> &Mat<Complex64> {
        &self.left
    }

    pub fn right_mode(&self, i: usize) -> FluctuationField {
        column_field(&self.right, i)
    }

    pub fn left_mode(&self, i: usize) -> FluctuationField {
        column_field(&self.left, i)
    }

    pub fn index_of(&self, tag: ModeTag) -> Option<usize> {
        self.tags.iter().position(|&t| t == tag)
    }

    pub fn indices_of(&self, tag: ModeTag) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.tags[i] == tag).collect()
    }

    pub fn goldstone(&self) -> Result<usize> {
        self.index_of(ModeTag::Goldstone)
            .ok_or_else(|| Error::Classification("no goldstone mode identified".into()))
    }

    pub fn momentum(&self) -> Result<usize> {
        self.index_of(ModeTag::Momentum)
            .ok_or_else(|| Error::Classification("no momentum mode identified".into()))
    }

    /// All mode indices except the Goldstone mode.
    pub fn retained(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.tags[i] != ModeTag::Goldstone).collect()
    }

    /// Mode whose eigenvalue is closest to −2 − λᵢ within the same parity
    /// sector (the spectrum of 𝓛 is symmetric under λ ↦ −2 − λ).
    pub fn partner(&self, i: usize) -> Option<usize> {
        let target = Complex64::new(-2.0, 0.0) - self.eigenvalues[i];
        (0..self.len())
            .filter(|&j| j != i && self.parity[j] == self.parity[i])
            .min_by(|&a, &b| {
                let da = (self.eigenvalues[a] - target).norm();
                let db = (self.eigenvalues[b] - target).norm();
                da.total_cmp(&db)
            })
    }

    /// Largest relative difference between the paired left vectors and those
    /// obtained by inverting the right-eigenvector matrix.
    pub fn inverse_route_error(&self) -> Option<f64> {
        self.inverse_route_error
    }

    /// max |⟨wᵢ|vⱼ⟩ − δᵢⱼ| over all pairs.
    pub fn gram_deviation(&self) -> f64 {
        let g = self.left.adjoint() * &self.right;
        let dx = self.grid.dx();
        let mut dev: f64 = 0.0;
        for j in 0..g.ncols() {
            for i in 0..g.nrows() {
                let delta = if i == j { 1.0 } else { 0.0 };
                dev = dev.max((g[(i, j)] * dx - delta).norm());
            }
        }
        dev
    }

    /// Numerical rank of the right-eigenvector matrix.
    pub fn right_rank(&self, rel_tol: f64) -> Result<usize> {
        let sv = self
            .right
            .singular_values()
            .map_err(|e| Error::Eigen(format!("{e:?}")))?;
        let smax = sv.iter().cloned().fold(0.0, f64::max);
        Ok(sv.iter().filter(|&&s| s > rel_tol * smax).count())
    }

    /// ⟨f|vᵢ⟩ for every mode.
    pub fn right_projections(&self, f: &FluctuationField) -> Result<Vec<Complex64>> {
        self.project(&self.right, f)
    }

    /// ⟨wᵢ|f⟩ for every mode.
    pub fn left_projections(&self, f: &FluctuationField) -> Result<Vec<Complex64>> {
        Ok(self.project(&self.left, f)?.into_iter().map(|c| c.conj()).collect())
    }

    fn project(&self, m: &Mat<Complex64>, f: &FluctuationField) -> Result<Vec<Complex64>> {
        self.grid.check_len(f.len())?;
        let s = f.to_stacked();
        let dx = self.grid.dx();
        Ok((0..m.ncols())
            .map(|j| {
                m.col(j)
                    .iter()
                    .zip(&s)
                    .map(|(v, a)| a.conj() * v)
                    .sum::<Complex64>()
                    * dx
            })
            .collect())
    }

    /// Reconstructs Σᵢ ⟨wᵢ|f⟩vᵢ over the given modes.
    pub fn expand(&self, f: &FluctuationField, modes: &[usize]) -> Result<FluctuationField> {
        let c = self.left_projections(f)?;
        let mut out = vec![Complex64::new(0.0, 0.0); 2 * self.grid.n()];
        for &i in modes {
            for (o, v) in out.iter_mut().zip(self.right.col(i).iter()) {
                *o += c[i] * v;
            }
        }
        Ok(FluctuationField::from_stacked(&out))
    }
}

/// Grid basis functions of one parity sector: (index, coefficient) lists.
fn sector_basis(n: usize, parity: Option<Parity>) -> Vec<Vec<(usize, f64)>> {
    match parity {
        None => (0..n).map(|j| vec![(j, 1.0)]).collect(),
        Some(Parity::Even) => {
            let mut b = vec![vec![(0, 1.0)], vec![(n / 2, 1.0)]];
            b.extend((1..n / 2).map(|j| vec![(j, FRAC_1_SQRT_2), (n - j, FRAC_1_SQRT_2)]));
            b
        }
        Some(Parity::Odd) => (1..n / 2)
            .map(|j| vec![(j, FRAC_1_SQRT_2), (n - j, -FRAC_1_SQRT_2)])
            .collect(),
    }
}

/// Real form R = Tᴴ𝓛T, returned with the largest discarded imaginary part.
fn real_form(l: &Mat<Complex64>, n: usize) -> (Mat<f64>, f64) {
    let mut r = Mat::<f64>::zeros(2 * n, 2 * n);
    let mut max_im: f64 = 0.0;
    let i = Complex64::i();
    for c in 0..n {
        for row in 0..n {
            let a = l[(row, c)];
            let b = l[(row, n + c)];
            let cc = l[(n + row, c)];
            let d = l[(n + row, n + c)];
            let entries = [
                (row, c, 0.5 * (a + b + cc + d)),
                (row, n + c, 0.5 * i * (a - b + cc - d)),
                (n + row, c, 0.5 * i * (-a - b + cc + d)),
                (n + row, n + c, 0.5 * (a - b - cc + d)),
            ];
            for (rr, rc, v) in entries {
                max_im = max_im.max(v.im.abs());
                r[(rr, rc)] = v.re;
            }
        }
    }
    (r, max_im)
}

fn project_sector(r: &Mat<f64>, n: usize, basis: &[Vec<(usize, f64)>]) -> Mat<f64> {
    let nb = basis.len();
    Mat::<f64>::from_fn(2 * nb, 2 * nb, |a, b| {
        let (ca, ba) = (a / nb, a % nb);
        let (cb, bb) = (b / nb, b % nb);
        let mut s = 0.0;
        for &(i, ei) in &basis[ba] {
            for &(j, ej) in &basis[bb] {
                s += ei * ej * r[(ca * n + i, cb * n + j)];
            }
        }
        s
    })
}

/// Lifts sector coordinates (p-part, q-part) to a stacked physical vector T·E·y.
fn lift(y: impl Iterator<Item = Complex64>, n: usize, basis: &[Vec<(usize, f64)>]) -> Vec<Complex64> {
    let nb = basis.len();
    let mut p = vec![Complex64::new(0.0, 0.0); n];
    let mut q = vec![Complex64::new(0.0, 0.0); n];
    for (a, ya) in y.enumerate() {
        let target = if a < nb { &mut p } else { &mut q };
        for &(j, e) in &basis[a % nb] {
            target[j] += ya * e;
        }
    }
    let i = Complex64::i();
    let mut out = Vec::with_capacity(2 * n);
    out.extend(p.iter().zip(&q).map(|(p, q)| (p + i * q) * FRAC_1_SQRT_2));
    out.extend(p.iter().zip(&q).map(|(p, q)| (p - i * q) * FRAC_1_SQRT_2));
    out
}

struct SectorModes {
    lambda: Vec<Complex64>,
    y: Mat<Complex64>,
    /// Left coordinates u with uᵀy·dx = δ; the physical left vector is T·E·ū.
    u: Mat<Complex64>,
    inverse_route_error: f64,
}

fn eig_real(m: &Mat<f64>) -> Result<(Vec<Complex64>, Mat<Complex64>)> {
    let e = Eigen::new_from_real(m.as_ref()).map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let lambda = e.S().column_vector().iter().copied().collect();
    Ok((lambda, e.U().to_owned()))
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, i: usize) -> usize {
        let mut r = i;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut c = i;
        while self.0[c] != r {
            let next = self.0[c];
            self.0[c] = r;
            c = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra] = rb;
        }
    }
}

/// Greedy assignment of left columns to right columns by normalized overlap.
/// Returns the assignment and the groups of rights whose best candidates
/// were ambiguous.
fn greedy_pairing(overlap: &Mat<f64>) -> (Vec<usize>, Vec<Vec<usize>>) {
    let n = overlap.ncols();
    let best = |i: usize| (0..n).map(|k| overlap[(k, i)]).fold(0.0, f64::max);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| best(b).total_cmp(&best(a)));
    let mut used = vec![false; n];
    let mut assign = vec![usize::MAX; n];
    let mut ambiguous = Vec::new();
    for &i in &order {
        let mut cand: Vec<usize> = (0..n).filter(|&k| !used[k]).collect();
        cand.sort_by(|&a, &b| overlap[(b, i)].total_cmp(&overlap[(a, i)]));
        let k = cand[0];
        if let Some(&k2) = cand.get(1) {
            if overlap[(k2, i)] >= (1.0 - PAIRING_AMBIGUITY) * overlap[(k, i)] {
                ambiguous.push(vec![i, k, k2]);
            }
        }
        used[k] = true;
        assign[i] = k;
    }
    (assign, ambiguous)
}

fn solve_sector(rs: &Mat<f64>, dx: f64) -> Result<SectorModes> {
    let n = rs.nrows();
    let (lambda, mut y) = eig_real(rs)?;
    let (mu, u0) = eig_real(&rs.transpose().to_owned())?;
    for j in 0..n {
        let nrm = y.col(j).iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt() * dx.sqrt();
        for v in y.col_mut(j).iter_mut() {
            *v /= nrm;
        }
    }
    let raw = u0.transpose() * &y;
    let ynorm: Vec<f64> = (0..n).map(|j| y.col(j).norm_l2()).collect();
    let unorm: Vec<f64> = (0..n).map(|j| u0.col(j).norm_l2()).collect();
    let overlap = Mat::<f64>::from_fn(n, n, |k, i| raw[(k, i)].norm() / (unorm[k] * ynorm[i]));
    let (assign, ambiguous) = greedy_pairing(&overlap);
    for i in 0..n {
        let k = assign[i];
        let scale = 1e-6 * lambda[i].norm().max(1.0);
        if (mu[k] - lambda[i]).norm() > 1e-2f64.max(1e3 * scale) {
            return Err(Error::Eigen(format!(
                "left/right eigenvalue mismatch {} vs {}",
                lambda[i], mu[k]
            )));
        }
    }
    let mut u = Mat::<Complex64>::from_fn(n, n, |r, i| u0[(r, assign[i])]);

    // Couple pairs that are not biorthogonal to working precision (or whose
    // pairing was ambiguous) and biorthonormalize each coupled cluster at once.
    let m = u.transpose() * &y;
    let mut uf = UnionFind((0..n).collect());
    for group in &ambiguous {
        let i = group[0];
        for &k in &group[1..] {
            if let Some(r) = assign.iter().position(|&a| a == k) {
                uf.union(i, r);
            }
        }
    }
    for j in 0..n {
        for i in 0..n {
            if i != j && m[(i, j)].norm() > CLUSTER_COUPLING * m[(i, i)].norm() {
                uf.union(i, j);
            }
        }
    }
    let mut clusters: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        clusters.entry(uf.find(i)).or_default().push(i);
    }
    for members in clusters.values() {
        if members.len() == 1 {
            let i = members[0];
            let d = m[(i, i)] * dx;
            if d.norm() == 0.0 {
                return Err(Error::DegeneratePairing { cluster: vec![i] });
            }
            for v in u.col_mut(i).iter_mut() {
                *v /= d;
            }
            continue;
        }
        let c = members.len();
        let mcc = Mat::<Complex64>::from_fn(c, c, |a, b| m[(members[a], members[b])] * dx);
        let inv = mcc.partial_piv_lu().inverse();
        if inv.col_iter().flat_map(|c| c.iter()).any(|v| !v.is_finite()) {
            return Err(Error::DegeneratePairing { cluster: members.clone() });
        }
        let uc = Mat::<Complex64>::from_fn(n, c, |r, a| u[(r, members[a])]);
        let fixed = &uc * inv.transpose();
        for (a, &i) in members.iter().enumerate() {
            for r in 0..n {
                u[(r, i)] = fixed[(r, a)];
            }
        }
    }

    let yinv = y.partial_piv_lu().inverse();
    let mut err: f64 = 0.0;
    for i in 0..n {
        let (mut diff, mut norm) = (0.0, 0.0);
        for r in 0..n {
            let via_inv = yinv[(i, r)] / dx;
            diff += (u[(r, i)] - via_inv).norm_sqr();
            norm += via_inv.norm_sqr();
        }
        err = err.max((diff / norm).sqrt());
    }
    Ok(SectorModes { lambda, y, u, inverse_route_error: err })
}

fn parity_sectors(psi: &[Complex64], grid: &Grid1D) -> Vec<Option<Parity>> {
    let scale = psi.iter().map(|p| p.norm()).fold(0.0, f64::max);
    let even = (0..grid.n()).all(|j| (psi[j] - psi[grid.mirror(j)]).norm() <= 1e-14 * scale);
    if even {
        vec![Some(Parity::Even), Some(Parity::Odd)]
    } else {
        vec![None]
    }
}

/// Eigenvalues of 𝓛 with their parity sector, without eigenvectors.
pub fn spectrum(l: &LinearOperatorMatrix) -> Result<Vec<(Complex64, Option<Parity>)>> {
    let n = l.grid.n();
    let (r, _) = real_form(&l.matrix, n);
    let mut out = Vec::with_capacity(2 * n);
    for parity in parity_sectors(&l.psi_bar, &l.grid) {
        let rs = project_sector(&r, n, &sector_basis(n, parity));
        let lam = rs.eigenvalues().map_err(|e| Error::Eigen(format!("{e:?}")))?;
        out.extend(lam.into_iter().map(|v| (v, parity)));
    }
    Ok(out)
}

fn cosine(a: &[Complex64], b: &[Complex64]) -> f64 {
    let dot: Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    let na = a.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let nb = b.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot.norm() / (na * nb)
    }
}

/// Full biorthonormal eigensystem of 𝓛, with left vectors from 𝓛†.
pub fn eigensystem(l: &LinearOperatorMatrix, ldag: &LinearOperatorMatrix) -> Result<EigenSystem> {
    if l.kind != OperatorKind::L || ldag.kind != OperatorKind::LAdjoint {
        return Err(Error::invalid("expected (L, L-adjoint) operator pair"));
    }
    if l.grid != ldag.grid || l.psi_bar != ldag.psi_bar || l.params != ldag.params {
        return Err(Error::invalid("operators were built from different profiles"));
    }
    let grid = l.grid.clone();
    let n = grid.n();
    let dim = 2 * n;
    let scale = l.matrix.norm_max();
    let mut adj_err: f64 = 0.0;
    for c in 0..dim {
        for r in 0..dim {
            adj_err = adj_err.max((ldag.matrix[(r, c)] - l.matrix[(c, r)].conj()).norm());
        }
    }
    if adj_err > 1e-12 * scale {
        return Err(Error::Numerical(format!(
            "L-adjoint differs from the conjugate transpose of L by {adj_err:.3e}"
        )));
    }
    let (r, max_im) = real_form(&l.matrix, n);
    if max_im > 1e-12 * scale {
        return Err(Error::Numerical(format!(
            "operator lacks swap-conjugation symmetry (residual {max_im:.3e})"
        )));
    }

    let psi_scale = l.psi_bar.iter().map(|p| p.norm()).fold(0.0, f64::max);
    let sectors = parity_sectors(&l.psi_bar, &grid);

    struct Mode {
        lambda: Complex64,
        v: Vec<Complex64>,
        w: Vec<Complex64>,
        parity: Option<Parity>,
    }
    let mut modes = Vec::with_capacity(dim);
    let mut route_err: f64 = 0.0;
    for parity in sectors {
        let basis = sector_basis(n, parity);
        let rs = project_sector(&r, n, &basis);
        let sm = solve_sector(&rs, grid.dx())?;
        route_err = route_err.max(sm.inverse_route_error);
        for i in 0..sm.lambda.len() {
            modes.push(Mode {
                lambda: sm.lambda[i],
                v: lift(sm.y.col(i).iter().copied(), n, &basis),
                w: lift(sm.u.col(i).iter().map(|c| c.conj()), n, &basis),
                parity,
            });
        }
    }
    modes.sort_by(|a, b| {
        b.lambda
            .re
            .total_cmp(&a.lambda.re)
            .then(b.lambda.im.total_cmp(&a.lambda.im))
    });

    let right = Mat::<Complex64>::from_fn(dim, modes.len(), |r, c| modes[c].v[r]);
    let left = Mat::<Complex64>::from_fn(dim, modes.len(), |r, c| modes[c].w[r]);
    let eigenvalues: Vec<Complex64> = modes.iter().map(|m| m.lambda).collect();
    let parity = modes.iter().map(|m| m.parity).collect();
    let mut sys = EigenSystem::from_parts(
        grid.clone(),
        eigenvalues,
        right,
        left,
        vec![ModeTag::Generic; modes.len()],
        parity,
    );
    sys.inverse_route_error = Some(route_err);
    sys.classical = Some(l.psi_bar.clone());
    if psi_scale > 0.0 {
        tag_modes(&mut sys, &l.psi_bar, &modes.iter().map(|m| (&m.v, &m.w)).collect::<Vec<_>>())?;
    }
    Ok(sys)
}

fn tag_modes(
    sys: &mut EigenSystem,
    psi: &[Complex64],
    vecs: &[(&Vec<Complex64>, &Vec<Complex64>)],
) -> Result<()> {
    let grid = sys.grid.clone();
    let dpsi = first_derivative(psi, &grid)?;
    let g = FluctuationField::conjugate_pair(dpsi.clone()).to_stacked();
    let i = Complex64::i();
    let w2 = FluctuationField::conjugate_pair(dpsi.iter().map(|d| i * d).collect()).to_stacked();

    let best = |f: &dyn Fn(usize) -> f64| {
        (0..vecs.len())
            .map(|k| (k, f(k)))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap_or((0, 0.0))
    };
    let (gi, go) = best(&|k| cosine(&g, vecs[k].0));
    if go < TAG_OVERLAP {
        return Err(Error::Classification(format!(
            "largest goldstone overlap {go:.6} below {TAG_OVERLAP}"
        )));
    }
    sys.tags[gi] = ModeTag::Goldstone;
    let (mi, mo) = best(&|k| if k == gi { 0.0 } else { cosine(&w2, vecs[k].1) });
    if mo < TAG_OVERLAP {
        return Err(Error::Classification(format!(
            "largest momentum overlap {mo:.6} below {TAG_OVERLAP}"
        )));
    }
    sys.tags[mi] = ModeTag::Momentum;

    let lam = sys.eigenvalues.clone();
    let localized = |k: usize| sys.localization[k] > LOCALIZATION_THRESHOLD && k != gi && k != mi;
    let bif = (0..lam.len())
        .filter(|&k| localized(k) && lam[k].im == 0.0)
        .max_by(|&a, &b| lam[a].re.total_cmp(&lam[b].re));
    let hopf = (0..lam.len())
        .filter(|&k| localized(k) && lam[k].im > 0.0)
        .max_by(|&a, &b| lam[a].re.total_cmp(&lam[b].re));
    if let Some(b) = bif {
        sys.tags[b] = ModeTag::Bifurcating;
    }
    if let Some(h) = hopf {
        sys.tags[h] = ModeTag::HopfPair;
        let target = lam[h].conj();
        if let Some(c) = (0..lam.len())
            .filter(|&k| k != h)
            .min_by(|&a, &b| (lam[a] - target).norm().total_cmp(&(lam[b] - target).norm()))
        {
            sys.tags[c] = ModeTag::HopfPair;
        }
    }
    Ok(())
}
