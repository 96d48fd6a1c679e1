//! Fast invariant self-test behind the `check` subcommand.

use ask_core::baselines::{hb_step, nag_step, BaselineConfig, BaselineState, Method};
use ask_core::problems::{registry, Problem, ProblemKind};
use ask_core::spectral_basis::{eval_basis, MAX_INTERPOLATION_COND};
use ask_core::{ask_optimize, ask_step, smolyak_grid, AskConfig, CollocationOperators, DynamicsField, Status};

use crate::suite::sample_inits;

pub struct CheckOutcome {
    pub name: &'static str,
    pub result: Result<(), String>,
}

type Check = (&'static str, fn() -> Result<(), String>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn grid_counts() -> Result<(), String> {
    for (d, l, want) in [(1, 1, 3), (2, 1, 5), (2, 3, 29), (100, 1, 201)] {
        let n = smolyak_grid(d, l).map_err(|e| e.to_string())?.count();
        ensure(n == want, || format!("d={d} level={l}: {n} points, expected {want}"))?;
    }
    Ok(())
}

fn collocation_conditioning() -> Result<(), String> {
    for (d, l) in [(2, 1), (2, 2), (2, 3), (10, 1), (100, 1)] {
        let ops = CollocationOperators::new(d, l).map_err(|e| e.to_string())?;
        ensure(ops.cond_m() < MAX_INTERPOLATION_COND, || format!("d={d} level={l}: cond {}", ops.cond_m()))?;
    }
    Ok(())
}

fn derivative_matrices() -> Result<(), String> {
    let ops = CollocationOperators::new(2, 3).map_err(|e| e.to_string())?;
    let h = 1e-6;
    for (k, p) in ops.grid().points().iter().enumerate() {
        for (j, alpha) in ops.basis().indices().iter().enumerate() {
            for i in 0..2 {
                let mut hi = p.clone();
                let mut lo = p.clone();
                hi[i] += h;
                lo[i] -= h;
                let fd = (eval_basis(alpha, &hi) - eval_basis(alpha, &lo)) / (2.0 * h);
                let g = ops.differentiation()[i][(k, j)];
                ensure((fd - g).abs() <= 1e-6 * (1.0 + g.abs()), || {
                    format!("G_{i}[{k},{j}] = {g}, finite difference {fd}")
                })?;
            }
        }
    }
    Ok(())
}

/// Five-point central difference of `f` along coordinate `i`.
fn five_point(p: &Problem, x: &[f64], i: usize, h: f64) -> f64 {
    let at = |s: f64| {
        let mut y = x.to_vec();
        y[i] += s * h;
        p.value(&y)
    };
    (at(-2.0) - 8.0 * at(-1.0) + 8.0 * at(1.0) - at(2.0)) / (12.0 * h)
}

fn gradient_matches_fd(p: &Problem) -> Result<(), String> {
    for x in sample_inits(p, 10, 5) {
        let g = p.gradient(&x);
        for i in 0..p.dim().min(10) {
            let fd = five_point(p, &x, i, 1e-3 * (1.0 + x[i].abs()));
            let scale = 1.0 + g[i].abs().max(fd.abs());
            ensure((fd - g[i]).abs() <= 1e-5 * scale, || {
                format!("{}: d/dx{i} = {} vs finite difference {fd}", p.name(), g[i])
            })?;
        }
    }
    Ok(())
}

fn registry_gradients() -> Result<(), String> {
    registry().iter().try_for_each(gradient_matches_fd)
}

fn optima_are_stationary() -> Result<(), String> {
    for p in registry() {
        for opt in p.known_optima() {
            let g = p.grad_norm(&opt.point);
            ensure(g <= 1e-8, || format!("{}: |grad| = {g:e} at the listed optimum", p.name()))?;
        }
    }
    Ok(())
}

fn linear_step_is_exact() -> Result<(), String> {
    let ops = CollocationOperators::new(1, 1).map_err(|e| e.to_string())?;
    let u = DynamicsField::new(1, |x, out| out[0] = -x[0]);
    let cfg = AskConfig { radius: 0.1, horizon: 10.0, ..AskConfig::default() };
    let (x, diag) = ask_step(&[1.0], &u, &ops, &cfg).map_err(|e| e.to_string())?;
    ensure(diag.accepted_t == Some(0.078125), || format!("accepted t = {:?}", diag.accepted_t))?;
    ensure((x[0] - (-0.078125f64).exp()).abs() < 1e-12, || format!("x = {}", x[0]))
}

fn quadratic_in_one_step() -> Result<(), String> {
    let p = Problem::new(
        "half_norm",
        2,
        ProblemKind::Minimize,
        |x| 0.5 * (x[0] * x[0] + x[1] * x[1]),
        |x, g| g.copy_from_slice(x),
    );
    let cfg = AskConfig { radius: 2.0, tol: 1e-8, ..AskConfig::default() };
    let r = ask_optimize(&p, &[0.6, -0.3], &cfg).map_err(|e| e.to_string())?;
    ensure(r.status == Status::Converged && r.outer_iters == 1, || {
        format!("status {} after {} iterations", r.status, r.outer_iters)
    })
}

fn baseline_recursions() -> Result<(), String> {
    let u = DynamicsField::new(1, |x, out| out[0] = -x[0]);
    let cfg = BaselineConfig { alpha: 0.1, beta: 0.5, ..BaselineConfig::new(Method::Hb) };
    let mut s = BaselineState::new(&[1.0]);
    hb_step(&mut s, &u, &cfg);
    hb_step(&mut s, &u, &cfg);
    ensure((s.x[0] - 0.76).abs() < 1e-14, || format!("heavy ball x2 = {}", s.x[0]))?;

    let mut s = BaselineState::new(&[1.0]);
    nag_step(&mut s, &u, &cfg);
    nag_step(&mut s, &u, &cfg);
    ensure((s.x[0] - 0.7846421827387212).abs() < 1e-12, || format!("nesterov x2 = {}", s.x[0]))
}

const CHECKS: [Check; 8] = [
    ("sparse grid sizes", grid_counts),
    ("collocation conditioning", collocation_conditioning),
    ("differentiation matrices", derivative_matrices),
    ("problem gradients", registry_gradients),
    ("known optima stationary", optima_are_stationary),
    ("linear flow step", linear_step_is_exact),
    ("quadratic one-step convergence", quadratic_in_one_step),
    ("baseline recursions", baseline_recursions),
];

pub fn run_checks() -> Vec<CheckOutcome> {
    CHECKS.iter().map(|&(name, f)| CheckOutcome { name, result: f() }).collect()
}
