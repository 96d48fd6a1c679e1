//! Benchmark objectives with hand-coded gradients, known optima, and their
//! reduction to gradient-flow dynamics.

use std::sync::Arc;

use faer::Mat;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

use crate::error::{AskError, Result};
use crate::koopman::DynamicsField;

/// Whether all coordinates are minimized, or the first `split` are minimized
/// and the rest maximized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    Minimize,
    MinMax { split: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnownOptimum {
    pub point: Vec<f64>,
    pub value: f64,
}

type ValueFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type GradFn = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;

/// An objective `f: ℝ^d → ℝ` with its gradient.
#[derive(Clone)]
pub struct Problem {
    name: String,
    dim: usize,
    kind: ProblemKind,
    value: ValueFn,
    gradient: GradFn,
    known_optima: Vec<KnownOptimum>,
    init_box: Vec<(f64, f64)>,
}

impl std::fmt::Debug for Problem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Problem")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("kind", &self.kind)
            .finish_non_exhaustive()
    }
}

impl Problem {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        kind: ProblemKind,
        value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            dim,
            kind,
            value: Arc::new(value),
            gradient: Arc::new(gradient),
            known_optima: Vec::new(),
            init_box: vec![(-1.0, 1.0); dim],
        }
    }

    pub fn with_optimum(mut self, point: Vec<f64>, value: f64) -> Self {
        self.known_optima.push(KnownOptimum { point, value });
        self
    }

    pub fn with_init_box(mut self, init_box: Vec<(f64, f64)>) -> Self {
        self.init_box = init_box;
        self
    }

    /// Same init interval in every coordinate.
    pub fn with_uniform_init(self, lo: f64, hi: f64) -> Self {
        let dim = self.dim;
        self.with_init_box(vec![(lo, hi); dim])
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> ProblemKind {
        self.kind
    }

    pub fn known_optima(&self) -> &[KnownOptimum] {
        &self.known_optima
    }

    pub fn init_box(&self) -> &[(f64, f64)] {
        &self.init_box
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }

    pub fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        (self.gradient)(x, out)
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim];
        (self.gradient)(x, &mut g);
        g
    }

    /// Euclidean norm of the gradient.
    pub fn grad_norm(&self, x: &[f64]) -> f64 {
        norm2(&self.gradient(x))
    }
}

pub(crate) fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `u = -∇f` for minimization; `u = (-∇_x f, +∇_y f)` for min-max.
pub fn gradient_flow(problem: &Problem) -> DynamicsField {
    let grad = Arc::clone(&problem.gradient);
    match problem.kind {
        ProblemKind::Minimize => DynamicsField::new(problem.dim, move |x, out| {
            grad(x, out);
            out.iter_mut().for_each(|v| *v = -*v);
        }),
        ProblemKind::MinMax { split } => DynamicsField::new(problem.dim, move |x, out| {
            grad(x, out);
            out[..split].iter_mut().for_each(|v| *v = -*v);
        }),
    }
}

// ---- test functions ---------------------------------------------------------

/// `Σ_i Σ_{j≤i} x_j²`; unique minimum 0 at the origin.
pub fn rotated_hyper_ellipsoid(dim: usize) -> Problem {
    Problem::new(
        "rotated_hyper_ellipsoid",
        dim,
        ProblemKind::Minimize,
        move |x| x.iter().enumerate().map(|(j, v)| (dim - j) as f64 * v * v).sum(),
        move |x, g| {
            for (j, (gj, v)) in g.iter_mut().zip(x).enumerate() {
                *gj = 2.0 * (dim - j) as f64 * v;
            }
        },
    )
    .with_optimum(vec![0.0; dim], 0.0)
    .with_uniform_init(-65.0, 65.0)
}

/// `Σ_i |x_i|^{i+1}` (1-based `i`). The gradient `(i+1) x_i |x_i|^{i-1}` is
/// continuous everywhere; second derivatives are non-smooth at `x_i = 0` for
/// `i >= 2`.
pub fn sum_of_different_powers(dim: usize) -> Problem {
    Problem::new(
        "sum_of_different_powers",
        dim,
        ProblemKind::Minimize,
        |x| x.iter().enumerate().map(|(i, v)| v.abs().powi(i as i32 + 2)).sum(),
        |x, g| {
            for (i, (gi, v)) in g.iter_mut().zip(x).enumerate() {
                let p = i as i32 + 2;
                *gi = p as f64 * v * v.abs().powi(p - 2);
            }
        },
    )
    .with_optimum(vec![0.0; dim], 0.0)
    .with_uniform_init(-1.0, 1.0)
}

/// Bohachevsky function 2.
pub fn bohachevsky2() -> Problem {
    use std::f64::consts::PI;
    Problem::new(
        "bohachevsky2",
        2,
        ProblemKind::Minimize,
        |x| x[0] * x[0] + x[1] * x[1] - 0.3 * (3.0 * PI * x[0]).cos() * (4.0 * PI * x[1]).cos() + 0.3,
        |x, g| {
            let (a, b) = (3.0 * PI * x[0], 4.0 * PI * x[1]);
            g[0] = 2.0 * x[0] + 0.9 * PI * a.sin() * b.cos();
            g[1] = 2.0 * x[1] + 1.2 * PI * a.cos() * b.sin();
        },
    )
    .with_optimum(vec![0.0, 0.0], 0.0)
    .with_uniform_init(-2.0, 2.0)
}

fn camel3_value(x: &[f64]) -> f64 {
    let x1 = x[0];
    2.0 * x1 * x1 - 1.05 * x1.powi(4) + x1.powi(6) / 6.0 + x1 * x[1] + x[1] * x[1]
}

fn camel3_gradient(x: &[f64], g: &mut [f64]) {
    let x1 = x[0];
    g[0] = 4.0 * x1 - 4.2 * x1.powi(3) + x1.powi(5) + x[1];
    g[1] = x1 + 2.0 * x[1];
}

/// Three-hump camel function.
pub fn camel3() -> Problem {
    Problem::new("camel3", 2, ProblemKind::Minimize, camel3_value, camel3_gradient)
        .with_optimum(vec![0.0, 0.0], 0.0)
        .with_uniform_init(-5.0, 5.0)
}

/// Three-hump camel as `min_{x1} max_{x2}`.
pub fn camel3_minmax() -> Problem {
    Problem::new("camel3_minmax", 2, ProblemKind::MinMax { split: 1 }, camel3_value, camel3_gradient)
        .with_optimum(vec![0.0, 0.0], 0.0)
        .with_uniform_init(-3.0, 3.0)
}

/// Six-hump camel function; the two global minima are listed to full
/// precision (≈ -1.0316 at ±(0.0898, -0.7126)).
pub fn camel6() -> Problem {
    const X1: f64 = 0.089_842_013_100_318_07;
    const X2: f64 = -0.712_656_403_020_739_6;
    const F: f64 = -1.031_628_453_489_877_4;
    Problem::new(
        "camel6",
        2,
        ProblemKind::Minimize,
        |x| {
            let (a, b) = (x[0], x[1]);
            (4.0 - 2.1 * a * a + a.powi(4) / 3.0) * a * a + a * b + (-4.0 + 4.0 * b * b) * b * b
        },
        |x, g| {
            let (a, b) = (x[0], x[1]);
            g[0] = 8.0 * a - 8.4 * a.powi(3) + 2.0 * a.powi(5) + b;
            g[1] = a - 8.0 * b + 16.0 * b.powi(3);
        },
    )
    .with_optimum(vec![X1, X2], F)
    .with_optimum(vec![-X1, -X2], F)
    .with_uniform_init(-3.0, 3.0)
}

fn dixon_price_value(x: &[f64]) -> f64 {
    let head = (x[0] - 1.0).powi(2);
    head + (1..x.len())
        .map(|k| {
            let r = 2.0 * x[k] * x[k] - x[k - 1];
            (k + 1) as f64 * r * r
        })
        .sum::<f64>()
}

fn dixon_price_gradient(x: &[f64], g: &mut [f64]) {
    g.fill(0.0);
    g[0] = 2.0 * (x[0] - 1.0);
    for k in 1..x.len() {
        let w = (k + 1) as f64;
        let r = 2.0 * x[k] * x[k] - x[k - 1];
        g[k] += w * 2.0 * r * 4.0 * x[k];
        g[k - 1] -= w * 2.0 * r;
    }
}

/// Dixon–Price global minimizer `x_j = 2^{-(2^j - 2)/2^j}` (1-based `j`).
pub fn dixon_price_optimum(dim: usize) -> Vec<f64> {
    (1..=dim)
        .map(|j| {
            let p = 2f64.powi(j as i32);
            2f64.powf(-(p - 2.0) / p)
        })
        .collect()
}

/// Dixon–Price function in `dim >= 1` dimensions.
pub fn dixon_price(dim: usize) -> Problem {
    Problem::new("dixon_price", dim, ProblemKind::Minimize, dixon_price_value, dixon_price_gradient)
        .with_optimum(dixon_price_optimum(dim), 0.0)
        .with_uniform_init(-10.0, 10.0)
}

/// Dixon–Price as a min-max problem: first `split` coordinates minimized.
pub fn dixon_price_minmax(dim: usize, split: usize) -> Problem {
    Problem::new(
        "dixon_price_minmax",
        dim,
        ProblemKind::MinMax { split: split.min(dim) },
        dixon_price_value,
        dixon_price_gradient,
    )
    .with_optimum(dixon_price_optimum(dim), 0.0)
    .with_uniform_init(-10.0, 10.0)
}

/// Two-dimensional Rosenbrock function.
pub fn rosenbrock() -> Problem {
    Problem::new(
        "rosenbrock",
        2,
        ProblemKind::Minimize,
        |x| 100.0 * (x[1] - x[0] * x[0]).powi(2) + (x[0] - 1.0).powi(2),
        |x, g| {
            let r = x[1] - x[0] * x[0];
            g[0] = -400.0 * x[0] * r + 2.0 * (x[0] - 1.0);
            g[1] = 200.0 * r;
        },
    )
    .with_optimum(vec![1.0, 1.0], 0.0)
    .with_uniform_init(-2.0, 2.0)
}

/// `min_{x1} max_{x2} x1 x2`.
pub fn minmax_bilinear() -> Problem {
    Problem::new(
        "minmax_bilinear",
        2,
        ProblemKind::MinMax { split: 1 },
        |x| x[0] * x[1],
        |x, g| {
            g[0] = x[1];
            g[1] = x[0];
        },
    )
    .with_optimum(vec![0.0, 0.0], 0.0)
    .with_uniform_init(-1.0, 1.0)
}

/// `min_{x1} max_{x2} -x1² x2² + 0.5 x2²`.
pub fn minmax_case2() -> Problem {
    Problem::new(
        "minmax_case2",
        2,
        ProblemKind::MinMax { split: 1 },
        |x| -x[0] * x[0] * x[1] * x[1] + 0.5 * x[1] * x[1],
        |x, g| {
            g[0] = -2.0 * x[0] * x[1] * x[1];
            g[1] = -2.0 * x[0] * x[0] * x[1] + x[1];
        },
    )
    .with_optimum(vec![0.0, 0.0], 0.0)
    .with_uniform_init(-1.0, 1.0)
}

/// `min_{x1} max_{x2} -x1² x2 + 0.5 x2²`.
pub fn minmax_case2_alt() -> Problem {
    Problem::new(
        "minmax_case2_alt",
        2,
        ProblemKind::MinMax { split: 1 },
        |x| -x[0] * x[0] * x[1] + 0.5 * x[1] * x[1],
        |x, g| {
            g[0] = -2.0 * x[0] * x[1];
            g[1] = -x[0] * x[0] + x[1];
        },
    )
    .with_optimum(vec![0.0, 0.0], 0.0)
    .with_uniform_init(-1.0, 1.0)
}

/// `½ xᵀA x − xᵀb` for a dense symmetric `A` (row-major) and `b`.
pub fn least_squares_from(a: Vec<Vec<f64>>, b: Vec<f64>) -> Problem {
    let dim = b.len();
    let a = Arc::new(a);
    let b = Arc::new(b);
    let (av, bv) = (Arc::clone(&a), Arc::clone(&b));
    let matvec = |a: &[Vec<f64>], x: &[f64], i: usize| -> f64 { a[i].iter().zip(x).map(|(aij, xj)| aij * xj).sum() };
    Problem::new(
        "least_squares",
        dim,
        ProblemKind::Minimize,
        move |x| (0..x.len()).map(|i| x[i] * (0.5 * matvec(&av, x, i) - bv[i])).sum(),
        move |x, g| {
            for (i, gi) in g.iter_mut().enumerate() {
                *gi = matvec(&a, x, i) - b[i];
            }
        },
    )
    .with_uniform_init(-10.0, 10.0)
}

/// Seeded least-squares problem: `A = Q diag(s) Qᵀ` with `s` log-spaced on
/// `[1, cond_target]` and `Q` a random orthogonal matrix (QR of a Gaussian
/// matrix, sign-fixed), `b = A x*` with `x*` uniform on `[-1, 1]^d`.
pub fn make_least_squares(dim: usize, cond_target: f64, seed: u64) -> Result<Problem> {
    if dim == 0 {
        return Err(AskError::ZeroDimension);
    }
    if !(cond_target >= 1.0) {
        return Err(AskError::InvalidConfig(format!("cond_target must be >= 1, got {cond_target}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gauss = Mat::<f64>::from_fn(dim, dim, |_, _| StandardNormal.sample(&mut rng));
    let qr = gauss.qr();
    let q = qr.compute_Q();
    let r = qr.R();
    // Q diag(sign(R_ii)) makes the factorization unique.
    let sign: Vec<f64> = (0..dim).map(|i| if r[(i, i)] < 0.0 { -1.0 } else { 1.0 }).collect();
    let spectrum: Vec<f64> =
        (0..dim).map(|i| if dim == 1 { 1.0 } else { cond_target.powf(i as f64 / (dim - 1) as f64) }).collect();
    let mut a = vec![vec![0.0; dim]; dim];
    for i in 0..dim {
        for j in i..dim {
            let v: f64 = (0..dim).map(|k| q[(i, k)] * sign[k] * spectrum[k] * q[(j, k)] * sign[k]).sum();
            a[i][j] = v;
            a[j][i] = v;
        }
    }
    let unit = Uniform::new_inclusive(-1.0, 1.0);
    let x_star: Vec<f64> = (0..dim).map(|_| unit.sample(&mut rng)).collect();
    let b: Vec<f64> = a.iter().map(|row| row.iter().zip(&x_star).map(|(p, q)| p * q).sum()).collect();
    let f_star = -0.5 * x_star.iter().zip(&b).map(|(x, b)| x * b).sum::<f64>();
    Ok(least_squares_from(a, b).with_optimum(x_star, f_star))
}

/// Parameters for [`lookup`] that some problems accept.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemParams {
    /// Overrides the default dimension where the problem supports it.
    pub dim: Option<usize>,
    /// Min-max coordinate split for `dixon_price_minmax` (default `dim / 2`).
    pub minmax_split: Option<usize>,
    pub seed: u64,
    pub cond_target: f64,
}

impl Default for ProblemParams {
    fn default() -> Self {
        Self { dim: None, minmax_split: None, seed: 0, cond_target: 100.0 }
    }
}

/// Stable problem identifiers, in registry order.
pub const PROBLEM_NAMES: &[&str] = &[
    "rotated_hyper_ellipsoid",
    "sum_of_different_powers",
    "bohachevsky2",
    "camel3",
    "camel3_minmax",
    "camel6",
    "dixon_price",
    "rosenbrock",
    "least_squares",
    "minmax_bilinear",
    "minmax_case2",
    "minmax_case2_alt",
    "dixon_price_minmax",
];

/// Resolves a problem by name. Fixed-dimension problems reject a `dim`
/// override that differs from their dimension.
pub fn lookup(name: &str, params: &ProblemParams) -> Result<Problem> {
    let fixed = |p: Problem| -> Result<Problem> {
        match params.dim {
            Some(d) if d != p.dim() => {
                Err(AskError::InvalidConfig(format!("`{}` is defined only for dim = {}", p.name(), p.dim())))
            }
            _ => Ok(p),
        }
    };
    let dim = |default: usize| -> Result<usize> {
        match params.dim {
            Some(0) => Err(AskError::ZeroDimension),
            Some(d) => Ok(d),
            None => Ok(default),
        }
    };
    match name {
        "rotated_hyper_ellipsoid" => Ok(rotated_hyper_ellipsoid(dim(2)?)),
        "sum_of_different_powers" => Ok(sum_of_different_powers(dim(2)?)),
        "bohachevsky2" => fixed(bohachevsky2()),
        "camel3" => fixed(camel3()),
        "camel3_minmax" => fixed(camel3_minmax()),
        "camel6" => fixed(camel6()),
        "dixon_price" => Ok(dixon_price(dim(2)?)),
        "rosenbrock" => fixed(rosenbrock()),
        "least_squares" => make_least_squares(dim(10)?, params.cond_target, params.seed),
        "minmax_bilinear" => fixed(minmax_bilinear()),
        "minmax_case2" => fixed(minmax_case2()),
        "minmax_case2_alt" => fixed(minmax_case2_alt()),
        "dixon_price_minmax" => {
            let d = dim(100)?;
            let split = params.minmax_split.unwrap_or(d / 2);
            if split > d {
                return Err(AskError::InvalidConfig(format!("split {split} exceeds dim {d}")));
            }
            Ok(dixon_price_minmax(d, split))
        }
        other => Err(AskError::InvalidConfig(format!("unknown function `{other}`"))),
    }
}

/// Every registered problem at its default parameters.
pub fn registry() -> Vec<Problem> {
    let params = ProblemParams::default();
    PROBLEM_NAMES.iter().map(|n| lookup(n, &params).expect("registry entry")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock_optimum() {
        assert_eq!(rosenbrock().value(&[1.0, 1.0]), 0.0);
        assert_eq!(rosenbrock().gradient(&[1.0, 1.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn dixon_price_2d_optimum() {
        let p = dixon_price(2);
        let opt = &p.known_optima()[0];
        assert_eq!(opt.point[0], 1.0);
        assert!((opt.point[1] - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(p.value(&opt.point).abs() < 1e-15);
    }

    #[test]
    fn camel6_reported_minimum() {
        let v = camel6().value(&[0.0898, -0.7126]);
        assert!((v + 1.0316).abs() < 1e-4, "{v}");
    }

    #[test]
    fn flows() {
        let u = gradient_flow(&minmax_bilinear());
        assert_eq!(u.eval(&[0.3, -0.7]), vec![0.7, 0.3]);

        let half = Problem::new(
            "half_norm",
            2,
            ProblemKind::Minimize,
            |x| 0.5 * (x[0] * x[0] + x[1] * x[1]),
            |x, g| g.copy_from_slice(x),
        );
        assert_eq!(gradient_flow(&half).eval(&[0.3, -0.7]), vec![-0.3, 0.7]);

        let (x1, x2) = (0.4, -1.3);
        let u = gradient_flow(&minmax_case2()).eval(&[x1, x2]);
        assert!((u[0] - 2.0 * x1 * x2 * x2).abs() < 1e-15);
        assert!((u[1] - (-2.0 * x1 * x1 * x2 + x2)).abs() < 1e-15);
    }

    #[test]
    fn least_squares_small() {
        let p = least_squares_from(vec![vec![2.0]], vec![6.0]);
        assert_eq!(p.gradient(&[3.0]), vec![0.0]);
        assert_eq!(p.value(&[1.0]), 1.0 - 6.0);
    }

    #[test]
    fn least_squares_generated_optimum() {
        let p = make_least_squares(8, 50.0, 7).unwrap();
        let opt = &p.known_optima()[0];
        assert!(p.grad_norm(&opt.point) < 1e-12);
        assert!((p.value(&opt.point) - opt.value).abs() < 1e-12);
        assert!(make_least_squares(0, 10.0, 1).is_err());
        assert!(make_least_squares(3, 0.5, 1).is_err());
    }

    #[test]
    fn lookup_rules() {
        assert!(lookup("nope", &ProblemParams::default()).is_err());
        let p = ProblemParams { dim: Some(3), ..Default::default() };
        assert!(lookup("rosenbrock", &p).is_err());
        assert_eq!(lookup("dixon_price", &p).unwrap().dim(), 3);
        let mm = lookup("dixon_price_minmax", &ProblemParams::default()).unwrap();
        assert_eq!(mm.kind(), ProblemKind::MinMax { split: 50 });
        assert_eq!(registry().len(), PROBLEM_NAMES.len());
    }
}
