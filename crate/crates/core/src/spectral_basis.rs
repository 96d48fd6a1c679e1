//! Tensor-product Chebyshev basis matched to a Smolyak grid, with the
//! interpolation matrix `M` and the per-dimension differentiation matrices
//! `G_i` on the reference cube.
//!
//! The basis mirrors the grid's block structure: 1-D level `l` contributes
//! degrees `{0}`, `{1, 2}` and `2^(l-1)+1 ..= 2^l` for `l = 0`, `1` and
//! `l >= 2` respectively, i.e. exactly as many new degrees as new points.
//! The resulting index set is downward closed and spans the polynomial space
//! reproduced by Smolyak interpolation on nested Clenshaw–Curtis points, so
//! `M` is square and nonsingular.
//!
//! Which `N` basis functions pair with the `N` points is not canonical; this
//! is one consistent choice.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use faer::linalg::solvers::PartialPivLu;
use faer::Mat;

use crate::error::{AskError, Result};
use crate::sparse_grid::{level_multi_indices, smolyak_grid, tensor_product, ReferenceGrid};

/// Upper bound on `cond(M)` accepted when building operators.
pub const MAX_INTERPOLATION_COND: f64 = 1e6;

/// Chebyshev degrees introduced by 1-D level `level`.
fn new_degrees_1d(level: usize) -> Vec<usize> {
    match level {
        0 => vec![0],
        1 => vec![1, 2],
        _ => ((1usize << (level - 1)) + 1..=(1usize << level)).collect(),
    }
}

/// One multi-index of polynomial degrees per basis function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisIndexSet {
    indices: Vec<Vec<usize>>,
}

impl BasisIndexSet {
    pub fn indices(&self) -> &[Vec<usize>] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Largest 1-D degree appearing anywhere in the set.
    pub fn max_degree(&self) -> usize {
        self.indices.iter().flatten().copied().max().unwrap_or(0)
    }
}

/// Downward-closed multi-index set of the same size and block order as `grid`.
pub fn basis_index_set(grid: &ReferenceGrid) -> BasisIndexSet {
    let mut indices = Vec::with_capacity(grid.count());
    for j in level_multi_indices(grid.dim(), grid.level()) {
        let factors: Vec<Vec<usize>> = j.iter().map(|&jk| new_degrees_1d(jk)).collect();
        indices.extend(tensor_product(&factors));
    }
    debug_assert_eq!(indices.len(), grid.count());
    BasisIndexSet { indices }
}

/// Values `T_0(x) ..= T_n(x)` and derivatives `T_0'(x) ..= T_n'(x)`.
///
/// Derivatives use `T'_{k+1} = 2 T_k + 2x T'_k - T'_{k-1}`, which is exact in
/// integer arithmetic at the grid points and stable on `[-1, 1]`.
pub fn chebyshev_with_derivative(n: usize, x: f64) -> (Vec<f64>, Vec<f64>) {
    let mut t = vec![0.0; n + 1];
    let mut dt = vec![0.0; n + 1];
    t[0] = 1.0;
    if n >= 1 {
        t[1] = x;
        dt[1] = 1.0;
    }
    for k in 1..n {
        t[k + 1] = 2.0 * x * t[k] - t[k - 1];
        dt[k + 1] = 2.0 * t[k] + 2.0 * x * dt[k] - dt[k - 1];
    }
    (t, dt)
}

/// Per-point, per-dimension tables of `T_k` and `T_k'` up to `max_degree`.
fn tables(grid: &ReferenceGrid, max_degree: usize) -> Vec<Vec<(Vec<f64>, Vec<f64>)>> {
    grid.points().iter().map(|p| p.iter().map(|&x| chebyshev_with_derivative(max_degree, x)).collect()).collect()
}

/// Evaluates basis function `alpha` at reference point `x`.
pub fn eval_basis(alpha: &[usize], x: &[f64]) -> f64 {
    alpha.iter().zip(x).map(|(&k, &xi)| chebyshev_with_derivative(k, xi).0[k]).product()
}

/// `M_ij = Ψ_j(ξ_i)`.
pub fn interpolation_matrix(grid: &ReferenceGrid, basis: &BasisIndexSet) -> Mat<f64> {
    let tab = tables(grid, basis.max_degree());
    Mat::from_fn(grid.count(), basis.len(), |i, j| {
        basis.indices[j].iter().enumerate().map(|(k, &deg)| tab[i][k].0[deg]).product()
    })
}

/// `(G_i)_lj = ∂Ψ_j/∂x_i (ξ_l)` for every dimension `i`, on the reference cube.
pub fn differentiation_matrices(grid: &ReferenceGrid, basis: &BasisIndexSet) -> Vec<Mat<f64>> {
    let tab = tables(grid, basis.max_degree());
    (0..grid.dim())
        .map(|dir| {
            Mat::from_fn(grid.count(), basis.len(), |l, j| {
                basis.indices[j]
                    .iter()
                    .enumerate()
                    .map(|(k, &deg)| if k == dir { tab[l][k].1[deg] } else { tab[l][k].0[deg] })
                    .product()
            })
        })
        .collect()
}

/// 2-norm condition number from the singular values.
pub fn condition_number(m: &Mat<f64>) -> f64 {
    match m.singular_values() {
        Ok(s) if !s.is_empty() => {
            let smin = *s.last().unwrap();
            if smin == 0.0 {
                f64::INFINITY
            } else {
                s[0] / smin
            }
        }
        _ => f64::INFINITY,
    }
}

/// Reference-domain collocation operators for one `(dim, level)`.
pub struct CollocationOperators {
    grid: ReferenceGrid,
    basis: BasisIndexSet,
    m: Mat<f64>,
    g: Vec<Mat<f64>>,
    m_lu: PartialPivLu<f64>,
    cond_m: f64,
}

impl std::fmt::Debug for CollocationOperators {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CollocationOperators")
            .field("dim", &self.grid.dim())
            .field("level", &self.grid.level())
            .field("count", &self.grid.count())
            .field("cond_m", &self.cond_m)
            .finish()
    }
}

impl CollocationOperators {
    /// Builds the operators; fails with `SingularBasis` if `cond(M)` exceeds
    /// [`MAX_INTERPOLATION_COND`].
    pub fn new(dim: usize, level: usize) -> Result<Self> {
        let grid = smolyak_grid(dim, level)?;
        let basis = basis_index_set(&grid);
        let m = interpolation_matrix(&grid, &basis);
        let g = differentiation_matrices(&grid, &basis);
        let cond_m = condition_number(&m);
        if !(cond_m <= MAX_INTERPOLATION_COND) {
            return Err(AskError::SingularBasis { cond: cond_m });
        }
        let m_lu = m.partial_piv_lu();
        Ok(Self { grid, basis, m, g, m_lu, cond_m })
    }

    /// Shared operators for `(dim, level)`, built at most once per process.
    pub fn cached(dim: usize, level: usize) -> Result<Arc<Self>> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<CollocationOperators>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        let mut map = cache.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(ops) = map.get(&(dim, level)) {
            return Ok(Arc::clone(ops));
        }
        let ops = Arc::new(Self::new(dim, level)?);
        map.insert((dim, level), Arc::clone(&ops));
        Ok(ops)
    }

    pub fn grid(&self) -> &ReferenceGrid {
        &self.grid
    }

    pub fn basis(&self) -> &BasisIndexSet {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn count(&self) -> usize {
        self.grid.count()
    }

    pub fn interpolation(&self) -> &Mat<f64> {
        &self.m
    }

    pub fn differentiation(&self) -> &[Mat<f64>] {
        &self.g
    }

    pub fn interpolation_lu(&self) -> &PartialPivLu<f64> {
        &self.m_lu
    }

    pub fn cond_m(&self) -> f64 {
        self.cond_m
    }
}
