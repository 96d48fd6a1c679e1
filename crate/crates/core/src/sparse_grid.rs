//! Nested Clenshaw–Curtis point sets and isotropic Smolyak sparse grids on
//! the reference cube `[-1, 1]^d`.
//!
//! A 1-D level `l >= 1` set holds the `2^l + 1` extrema `cos(k π / 2^l)`;
//! level 0 is the single point `{0}`. The sets are nested, so every level
//! contributes a disjoint block of *new* points:
//!
//! | level | new points                          |
//! |-------|-------------------------------------|
//! | 0     | `0`                                 |
//! | 1     | `-1, 1`                             |
//! | l ≥ 2 | `cos(k π / 2^l)` for odd `k`        |
//!
//! The d-dimensional grid of level `L` is the union of the tensor products of
//! these blocks over all level multi-indices `j` with `|j|₁ <= L`. Because the
//! blocks are disjoint the union needs no deduplication.
//!
//! Ordering is deterministic: blocks by `|j|₁` ascending, then `j`
//! lexicographically descending (so `(1,0)` precedes `(0,1)`); inside a block
//! the tensor product is enumerated lexicographically with the first
//! coordinate varying slowest, and each 1-D block is sorted ascending. The
//! zero vector is always the first point.

use crate::error::{AskError, Result};

/// New points contributed by 1-D level `level`, sorted ascending.
pub fn new_points_1d(level: usize) -> Vec<f64> {
    match level {
        0 => vec![0.0],
        1 => vec![-1.0, 1.0],
        _ => {
            let n = 1usize << level;
            // sin((n - 2k) π / (2n)) == cos(k π / n), but is exactly odd in k
            // and exactly zero at the midpoint, which keeps the nesting bitwise.
            let mut pts: Vec<f64> = (0..=n)
                .filter(|k| k % 2 == 1)
                .map(|k| {
                    let m = n as f64 - 2.0 * k as f64;
                    (m * std::f64::consts::PI / (2.0 * n as f64)).sin()
                })
                .collect();
            pts.sort_by(f64::total_cmp);
            pts
        }
    }
}

/// Nested Clenshaw–Curtis points of the given level, center first, then the
/// new points of each finer level in ascending order.
pub fn chebyshev_points_1d(level: usize) -> Vec<f64> {
    (0..=level).flat_map(new_points_1d).collect()
}

/// Level multi-indices `j` with `|j|₁ <= level`, in block order.
pub(crate) fn level_multi_indices(dim: usize, level: usize) -> Vec<Vec<usize>> {
    fn rec(dim: usize, budget: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == dim {
            out.push(prefix.clone());
            return;
        }
        for j in 0..=budget {
            prefix.push(j);
            rec(dim, budget - j, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(dim, level, &mut Vec::with_capacity(dim), &mut out);
    out.sort_by(|a, b| {
        let sa: usize = a.iter().sum();
        let sb: usize = b.iter().sum();
        sa.cmp(&sb).then_with(|| b.cmp(a))
    });
    out
}

/// Lexicographic tensor product of per-coordinate lists (first coordinate
/// slowest).
pub(crate) fn tensor_product<T: Copy>(factors: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut out: Vec<Vec<T>> = vec![Vec::with_capacity(factors.len())];
    for factor in factors {
        let mut next = Vec::with_capacity(out.len() * factor.len());
        for prefix in &out {
            for &v in factor {
                let mut p = prefix.clone();
                p.push(v);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// Sparse collocation points on `[-1, 1]^dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceGrid {
    dim: usize,
    level: usize,
    points: Vec<Vec<f64>>,
}

impl ReferenceGrid {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn count(&self) -> usize {
        self.points.len()
    }
}

/// Builds the isotropic Smolyak grid of the given dimension and level.
pub fn smolyak_grid(dim: usize, level: usize) -> Result<ReferenceGrid> {
    if dim == 0 {
        return Err(AskError::ZeroDimension);
    }
    let blocks_1d: Vec<Vec<f64>> = (0..=level).map(new_points_1d).collect();
    let mut points = Vec::new();
    for j in level_multi_indices(dim, level) {
        let factors: Vec<Vec<f64>> = j.iter().map(|&jk| blocks_1d[jk].clone()).collect();
        points.extend(tensor_product(&factors));
    }
    Ok(ReferenceGrid { dim, level, points })
}

/// Axis-aligned box `[lower_i, upper_i]` in real coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxDomain {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BoxDomain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(AskError::DimensionMismatch { expected: lower.len(), got: upper.len() });
        }
        if lower.is_empty() {
            return Err(AskError::ZeroDimension);
        }
        for (index, (&lo, &hi)) in lower.iter().zip(&upper).enumerate() {
            // also rejects NaN bounds
            if !(lo < hi) {
                return Err(AskError::DegenerateBox { index, lower: lo, upper: hi });
            }
        }
        Ok(Self { lower, upper })
    }

    /// The isotropic neighborhood `[x - r, x + r]`.
    pub fn around(center: &[f64], radius: f64) -> Result<Self> {
        Self::new(center.iter().map(|c| c - radius).collect(), center.iter().map(|c| c + radius).collect())
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// `U_i - L_i`.
    pub fn width(&self, i: usize) -> f64 {
        self.upper[i] - self.lower[i]
    }

    /// Closed-interval membership in every coordinate.
    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter().zip(self.lower.iter().zip(&self.upper)).all(|(v, (lo, hi))| lo <= v && v <= hi)
    }

    /// Componentwise projection onto the box.
    pub fn clamp(&self, x: &mut [f64]) {
        for (v, (lo, hi)) in x.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *v = v.clamp(*lo, *hi);
        }
    }

    /// Reference coordinate `ξ_i` to real coordinate.
    #[inline]
    pub fn to_real(&self, i: usize, xi: f64) -> f64 {
        self.width(i) / 2.0 * (xi + 1.0) + self.lower[i]
    }

    /// Real coordinate back to the reference interval.
    #[inline]
    pub fn to_reference(&self, i: usize, x: f64) -> f64 {
        2.0 * (x - self.lower[i]) / self.width(i) - 1.0
    }
}

/// Maps each reference point into `bx`; output `k` corresponds to point `k`.
pub fn map_to_box(grid: &ReferenceGrid, bx: &BoxDomain) -> Result<Vec<Vec<f64>>> {
    if grid.dim() != bx.dim() {
        return Err(AskError::DimensionMismatch { expected: grid.dim(), got: bx.dim() });
    }
    Ok(grid.points().iter().map(|p| p.iter().enumerate().map(|(i, &xi)| bx.to_real(i, xi)).collect()).collect())
}
