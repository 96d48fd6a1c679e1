//! Discretized Koopman generator on a real box, its spectral decomposition,
//! Koopman modes of the coordinate observables, and reconstruction of the
//! evolved state.
//!
//! For a box `[L, U]` with mapped grid points `p_k`, the generator matrix is
//!
//! ```text
//! U = Σ_i diag(u_i(p_1), …, u_i(p_N)) · 2/(U_i - L_i) · G_i
//! ```
//!
//! and the eigenpairs of `U w = λ M w` give eigenfunction values `Φ = M W`.
//! The observables are the coordinate functions, so `Ξ` holds the real grid
//! coordinates and `x(t) = Σ_j C(j,:) ν_j e^{λ_j t}` with `ν = Φ(0,:)`.

use std::sync::Arc;

use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::Mat;
use num_complex::Complex64 as C64;

use crate::error::{AskError, Result};
use crate::sparse_grid::{map_to_box, BoxDomain};
use crate::spectral_basis::CollocationOperators;

/// Relative tolerance of the eigen and mode residual invariants.
pub const RESIDUAL_TOL: f64 = 1e-8;
/// Relative tolerance on the imaginary part of a reconstructed state.
pub const IMAG_TOL: f64 = 1e-8;
/// Largest `Re(λ) t` accepted before the exponential is considered to overflow.
pub const MAX_EXPONENT: f64 = 700.0;
/// Singular values below this fraction of the largest are truncated in the
/// least-squares fallback of [`koopman_modes`].
pub const RANK_TOL: f64 = 1e-12;

/// A vector field `u: ℝ^d → ℝ^d`.
#[derive(Clone)]
pub struct DynamicsField {
    dim: usize,
    eval: Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>,
}

impl std::fmt::Debug for DynamicsField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DynamicsField").field("dim", &self.dim).finish_non_exhaustive()
    }
}

impl DynamicsField {
    /// `eval(x, out)` must write `u(x)` into `out` (both of length `dim`).
    pub fn new(dim: usize, eval: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static) -> Self {
        Self { dim, eval: Arc::new(eval) }
    }

    /// `u(x) = A x + b`, with `A` given row-major.
    pub fn affine(a: Vec<Vec<f64>>, b: Vec<f64>) -> Self {
        let dim = b.len();
        Self::new(dim, move |x, out| {
            for (i, o) in out.iter_mut().enumerate() {
                *o = b[i] + a[i].iter().zip(x).map(|(aij, xj)| aij * xj).sum::<f64>();
            }
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        (self.eval)(x, out)
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        (self.eval)(x, &mut out);
        out
    }
}

fn inf_norm_real(m: &Mat<f64>) -> f64 {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)].abs()).sum::<f64>()).fold(0.0, f64::max)
}

fn inf_norm_complex(m: &Mat<C64>) -> f64 {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)].norm()).sum::<f64>()).fold(0.0, f64::max)
}

fn real_to_complex(m: &Mat<f64>) -> Mat<C64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| C64::new(m[(i, j)], 0.0))
}

/// `Ξ`: the real coordinates of the box-mapped grid points, one row per point.
pub fn coordinate_observables(points: &[Vec<f64>]) -> Mat<f64> {
    let d = points.first().map_or(0, Vec::len);
    Mat::from_fn(points.len(), d, |k, i| points[k][i])
}

/// Assembles the discretized generator `U` of `u` on `bx`.
///
/// Returns `NonFiniteDynamics` if `u` is not finite at some mapped grid point.
pub fn assemble_generator(ops: &CollocationOperators, bx: &BoxDomain, u: &DynamicsField) -> Result<Mat<f64>> {
    let points = map_to_box(ops.grid(), bx)?;
    assemble_generator_at(ops, bx, u, &points)
}

pub(crate) fn assemble_generator_at(
    ops: &CollocationOperators,
    bx: &BoxDomain,
    u: &DynamicsField,
    points: &[Vec<f64>],
) -> Result<Mat<f64>> {
    let d = ops.dim();
    if u.dim() != d {
        return Err(AskError::DimensionMismatch { expected: d, got: u.dim() });
    }
    let n = ops.count();
    let mut values = vec![0.0; n * d];
    for (k, p) in points.iter().enumerate() {
        let row = &mut values[k * d..(k + 1) * d];
        u.eval_into(p, row);
        if row.iter().any(|v| !v.is_finite()) {
            return Err(AskError::NonFiniteDynamics { point: p.clone() });
        }
    }
    let mut gen = Mat::<f64>::zeros(n, n);
    for (i, gi) in ops.differentiation().iter().enumerate() {
        let scale = 2.0 / bx.width(i);
        for l in 0..n {
            let coeff = values[l * d + i] * scale;
            if coeff == 0.0 {
                continue;
            }
            for j in 0..n {
                let g = gi[(l, j)];
                if g != 0.0 {
                    gen[(l, j)] += coeff * g;
                }
            }
        }
    }
    Ok(gen)
}

/// Eigen-structure of `U W = M W Λ`.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<C64>,
    pub eigvecs: Mat<C64>,
    /// `Φ = M W`.
    pub phi: Mat<C64>,
    /// First row of `Φ`: eigenfunction values at the box center.
    pub nu: Vec<C64>,
    pub cond_phi: f64,
}

/// Solves the generalized eigenproblem by reduction to `M⁻¹U`.
///
/// Eigenvalues are ordered by real part descending, then imaginary part
/// ascending. Fails with `SingularBasis` if `M` cannot be inverted,
/// `EigenFailure` if the eigensolver does not converge, and `IllConditioned`
/// if `cond(Φ) > cond_cap` or the residual invariant is violated.
pub fn spectral_decompose(u: &Mat<f64>, m: &Mat<f64>, cond_cap: f64) -> Result<SpectralDecomposition> {
    spectral_decompose_factored(u, m, &m.partial_piv_lu(), cond_cap)
}

pub(crate) fn spectral_decompose_factored(
    u: &Mat<f64>,
    m: &Mat<f64>,
    m_lu: &PartialPivLu<f64>,
    cond_cap: f64,
) -> Result<SpectralDecomposition> {
    let n = m.nrows();
    if u.nrows() != n || u.ncols() != n || m.ncols() != n {
        return Err(AskError::DimensionMismatch { expected: n, got: u.nrows() });
    }
    let a = m_lu.solve(u);
    if a.col_iter().flat_map(|c| c.iter().copied().collect::<Vec<_>>()).any(|v| !v.is_finite()) {
        return Err(AskError::SingularBasis { cond: f64::INFINITY });
    }
    let evd = a.eigen().map_err(|_| AskError::EigenFailure)?;
    let s = evd.S();
    let w_raw = evd.U();

    let mut order: Vec<usize> = (0..n).collect();
    let lam: Vec<C64> = (0..n).map(|j| s[j]).collect();
    order.sort_by(|&p, &q| lam[q].re.total_cmp(&lam[p].re).then_with(|| lam[p].im.total_cmp(&lam[q].im)));
    let eigenvalues: Vec<C64> = order.iter().map(|&j| lam[j]).collect();
    let eigvecs = Mat::from_fn(n, n, |i, j| w_raw[(i, order[j])]);
    if eigenvalues.iter().any(|l| !l.is_finite()) {
        return Err(AskError::EigenFailure);
    }

    let m_c = real_to_complex(m);
    let phi = &m_c * &eigvecs;
    let nu: Vec<C64> = (0..n).map(|j| phi[(0, j)]).collect();

    // ‖U W − M W Λ‖∞ ≤ tol (1 + ‖U‖∞)
    let uw = &real_to_complex(u) * &eigvecs;
    let resid = Mat::from_fn(n, n, |i, j| uw[(i, j)] - phi[(i, j)] * eigenvalues[j]);
    let resid_norm = inf_norm_complex(&resid);
    if !(resid_norm <= RESIDUAL_TOL * (1.0 + inf_norm_real(u))) {
        return Err(AskError::IllConditioned { reason: "eigen residual", value: resid_norm });
    }

    let cond_phi = match phi.singular_values() {
        Ok(sv) if sv.last().copied().unwrap_or(0.0) > 0.0 => sv[0] / sv[sv.len() - 1],
        _ => f64::INFINITY,
    };
    if !(cond_phi <= cond_cap) {
        return Err(AskError::IllConditioned { reason: "cond(Phi)", value: cond_phi });
    }
    Ok(SpectralDecomposition { eigenvalues, eigvecs, phi, nu, cond_phi })
}

fn mode_residual_ok(phi: &Mat<C64>, c: &Mat<C64>, xi: &Mat<C64>) -> (bool, f64) {
    if c.col_iter().any(|col| col.iter().any(|z| !z.is_finite())) {
        return (false, f64::INFINITY);
    }
    let r = phi * c - xi;
    let norm = inf_norm_complex(&r);
    (norm <= RESIDUAL_TOL * (1.0 + inf_norm_complex(xi)), norm)
}

/// Solves `Φ C = Ξ` for the Koopman modes.
///
/// Uses an LU solve; if that misses the residual bound, retries with an SVD
/// least-squares solve truncating singular values below `RANK_TOL · σ_max`.
pub fn koopman_modes(phi: &Mat<C64>, xi: &Mat<f64>) -> Result<Mat<C64>> {
    if phi.nrows() != xi.nrows() || phi.ncols() != phi.nrows() {
        return Err(AskError::DimensionMismatch { expected: phi.nrows(), got: xi.nrows() });
    }
    let xi_c = real_to_complex(xi);
    let c = phi.partial_piv_lu().solve(&xi_c);
    let (ok, _) = mode_residual_ok(phi, &c, &xi_c);
    if ok {
        return Ok(c);
    }

    let svd = phi.svd().map_err(|_| AskError::EigenFailure)?;
    let (u, s, v) = (svd.U(), svd.S(), svd.V());
    let smax = s[0].re;
    let n = phi.ncols();
    // C = V Σ⁺ Uᴴ Ξ
    let uh_xi = u.adjoint() * &xi_c;
    let scaled = Mat::from_fn(n, xi.ncols(), |j, k| {
        let sj = s[j].re;
        if sj > RANK_TOL * smax {
            uh_xi[(j, k)] / sj
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let c = v * &scaled;
    let (ok, norm) = mode_residual_ok(phi, &c, &xi_c);
    if ok {
        Ok(c)
    } else {
        Err(AskError::IllConditioned { reason: "mode residual", value: norm })
    }
}

/// Spectral model of the flow on one neighborhood.
#[derive(Debug, Clone)]
pub struct SpectralSystem {
    pub eigenvalues: Vec<C64>,
    pub eigvecs: Mat<C64>,
    pub phi: Mat<C64>,
    pub nu: Vec<C64>,
    /// Koopman modes, `N × d`.
    pub modes: Mat<C64>,
    pub cond_phi: f64,
}

impl SpectralSystem {
    pub fn from_parts(decomp: SpectralDecomposition, modes: Mat<C64>) -> Self {
        let SpectralDecomposition { eigenvalues, eigvecs, phi, nu, cond_phi } = decomp;
        Self { eigenvalues, eigvecs, phi, nu, modes, cond_phi }
    }

    /// Full pipeline on one box: generator, decomposition and modes.
    pub fn build(ops: &CollocationOperators, bx: &BoxDomain, u: &DynamicsField, cond_cap: f64) -> Result<Self> {
        let points = map_to_box(ops.grid(), bx)?;
        let gen = assemble_generator_at(ops, bx, u, &points)?;
        let decomp = spectral_decompose_factored(&gen, ops.interpolation(), ops.interpolation_lu(), cond_cap)?;
        let modes = koopman_modes(&decomp.phi, &coordinate_observables(&points))?;
        Ok(Self::from_parts(decomp, modes))
    }

    pub fn dim(&self) -> usize {
        self.modes.ncols()
    }
}

/// `x(t) = Re Σ_j C(j,:) ν_j e^{λ_j t}`.
pub fn evolve_state(sys: &SpectralSystem, t: f64) -> Result<Vec<f64>> {
    let max_exp = sys.eigenvalues.iter().map(|l| l.re * t).fold(f64::NEG_INFINITY, f64::max);
    if max_exp > MAX_EXPONENT {
        return Err(AskError::Overflow { exponent: max_exp });
    }
    let d = sys.dim();
    let mut acc = vec![C64::new(0.0, 0.0); d];
    for (j, (&lam, &nu)) in sys.eigenvalues.iter().zip(&sys.nu).enumerate() {
        let w = nu * (lam * t).exp();
        for (k, a) in acc.iter_mut().enumerate() {
            *a += sys.modes[(j, k)] * w;
        }
    }
    let re: Vec<f64> = acc.iter().map(|z| z.re).collect();
    let im_norm = acc.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let re_norm = re.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if !(im_norm <= IMAG_TOL * (1.0 + re_norm)) || re.iter().any(|v| !v.is_finite()) {
        return Err(AskError::NumericalNoise { residue: im_norm });
    }
    Ok(re)
}
