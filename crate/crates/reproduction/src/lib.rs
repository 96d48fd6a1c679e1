//! Independent oracles and reference numbers used by the
//! `acceptance` test target.
//!
//! Nothing here depends on the optimizer crates, so the oracles cannot share
//! a bug with the code they check.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type Matrix = Vec<Vec<f64>>;

/// Mean gradient norms reported for the optimizer on the standard test
/// functions, as `(function, dim, level, mean grad norm)`.
pub const REPORTED_ASK_MEANS: &[(&str, usize, usize, f64)] = &[
    ("sum_of_different_powers", 2, 1, 9.9966e-7),
    ("camel3", 2, 1, 7.98e-9),
    ("camel6", 2, 1, 5.355e-7),
    ("dixon_price", 2, 1, 9.41e-8),
    ("rosenbrock", 2, 3, 3.08e-7),
    ("bohachevsky2", 2, 3, 3.7616e-14),
    ("dixon_price", 10, 1, 2.2497e-6),
];

/// Reported mean gradient norm on the second min-max example.
pub const REPORTED_CASE2_MEAN: f64 = 5.5890e-7;

pub fn identity(n: usize) -> Matrix {
    (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
}

pub fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    let m = b[0].len();
    (0..n).map(|i| (0..m).map(|j| (0..b.len()).map(|k| a[i][k] * b[k][j]).sum()).collect()).collect()
}

pub fn matvec(a: &Matrix, x: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(x).map(|(r, v)| r * v).sum()).collect()
}

fn inf_norm(a: &Matrix) -> f64 {
    a.iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring with a truncated Taylor series.
pub fn expm(a: &Matrix) -> Matrix {
    let n = a.len();
    let norm = inf_norm(a);
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let scale = 0.5f64.powi(squarings);
    let scaled: Matrix = a.iter().map(|r| r.iter().map(|v| v * scale).collect()).collect();

    let mut result = identity(n);
    let mut term = identity(n);
    for k in 1..=30 {
        term = matmul(&term, &scaled);
        for row in term.iter_mut() {
            for v in row.iter_mut() {
                *v /= k as f64;
            }
        }
        for (r, t) in result.iter_mut().zip(&term) {
            for (x, y) in r.iter_mut().zip(t) {
                *x += y;
            }
        }
    }
    for _ in 0..squarings {
        result = matmul(&result, &result);
    }
    result
}

/// Random `A` whose symmetric part is negative definite, so `exp(tA)` is a
/// contraction.
pub fn stable_matrix(rng: &mut ChaCha8Rng, dim: usize) -> Matrix {
    let mut a: Matrix = (0..dim).map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    let sym_bound =
        (0..dim).map(|i| (0..dim).map(|j| 0.5 * (a[i][j] + a[j][i]).abs()).sum::<f64>()).fold(0.0, f64::max);
    for (i, row) in a.iter_mut().enumerate() {
        row[i] -= sym_bound + rng.gen_range(0.1..1.0);
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn expm_of_diagonal() {
        let e = expm(&vec![vec![-1.0, 0.0], vec![0.0, 2.0]]);
        assert!((e[0][0] - (-1.0f64).exp()).abs() < 1e-14);
        assert!((e[1][1] - 2.0f64.exp()).abs() < 1e-13);
        assert_eq!(e[0][1], 0.0);
    }

    #[test]
    fn expm_of_rotation() {
        let t = 2.5f64;
        let e = expm(&vec![vec![0.0, -t], vec![t, 0.0]]);
        assert!((e[0][0] - t.cos()).abs() < 1e-14);
        assert!((e[1][0] - t.sin()).abs() < 1e-14);
    }

    #[test]
    fn expm_of_nilpotent() {
        let e = expm(&vec![vec![0.0, 3.0], vec![0.0, 0.0]]);
        assert_eq!(e, vec![vec![1.0, 3.0], vec![0.0, 1.0]]);
    }

    #[test]
    fn stable_matrices_contract() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for dim in 1..=4 {
            let a = stable_matrix(&mut rng, dim);
            let e = expm(&a.iter().map(|r| r.iter().map(|v| v * 0.1).collect()).collect());
            let x = vec![1.0; dim];
            let y = matvec(&e, &x);
            let n = |v: &[f64]| v.iter().map(|c| c * c).sum::<f64>();
            assert!(n(&y) < n(&x));
        }
    }
}
