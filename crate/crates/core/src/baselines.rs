//! Fixed-step gradient baselines: gradient descent, heavy ball, Nesterov,
//! and (optimistic) gradient descent/ascent for saddle problems.
//!
//! Every stepper works on the dynamics field `u` of the problem, so for
//! minimization `u = -∇f` and for min-max problems `u` is the combined
//! descent/ascent field. GDA is therefore GD on the combined field; it is
//! kept as a separate method because it only accepts min-max problems.

use crate::error::{AskError, Result};
use crate::koopman::DynamicsField;
use crate::optimizer::Status;
use crate::problems::{gradient_flow, norm2, Problem, ProblemKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Gd,
    Hb,
    Nag,
    Gda,
    Ogda,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Gd, Method::Hb, Method::Nag, Method::Gda, Method::Ogda];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Gd => "gd",
            Method::Hb => "hb",
            Method::Nag => "nag",
            Method::Gda => "gda",
            Method::Ogda => "ogda",
        }
    }

    pub fn requires_minmax(self) -> bool {
        matches!(self, Method::Gda | Method::Ogda)
    }
}

impl std::str::FromStr for Method {
    type Err = AskError;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| AskError::InvalidConfig(format!("unknown baseline method `{s}`")))
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineConfig {
    pub method: Method,
    /// Step size α.
    pub alpha: f64,
    /// Heavy-ball momentum β in `[0, 1)`.
    pub beta: f64,
    pub max_iters: usize,
    pub tol: f64,
}

impl BaselineConfig {
    pub fn new(method: Method) -> Self {
        Self { method, alpha: 1e-2, beta: 0.9, max_iters: 50_000, tol: 1e-6 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(AskError::InvalidConfig(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !(0.0..1.0).contains(&self.beta) {
            return Err(AskError::InvalidConfig(format!("beta must lie in [0, 1), got {}", self.beta)));
        }
        if !(self.tol > 0.0) {
            return Err(AskError::InvalidConfig(format!("tol must be positive, got {}", self.tol)));
        }
        Ok(())
    }
}

/// Iterate plus whatever memory the method needs.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineState {
    pub x: Vec<f64>,
    /// Heavy-ball direction.
    pub p: Vec<f64>,
    /// Previous Nesterov look-ahead point.
    pub y_prev: Vec<f64>,
    /// Nesterov sequence, starts at 1.
    pub t: f64,
    /// Field value at the previous iterate (OGDA); `None` before the first step.
    pub field_prev: Option<Vec<f64>>,
}

impl BaselineState {
    pub fn new(x0: &[f64]) -> Self {
        Self { x: x0.to_vec(), p: vec![0.0; x0.len()], y_prev: x0.to_vec(), t: 1.0, field_prev: None }
    }
}

/// `x ← x + α u(x)`.
pub fn gd_step(state: &mut BaselineState, u: &DynamicsField, cfg: &BaselineConfig) {
    let d = u.eval(&state.x);
    for (x, d) in state.x.iter_mut().zip(&d) {
        *x += cfg.alpha * d;
    }
}

/// `p ← u(x) + β p`, `x ← x + α p`.
pub fn hb_step(state: &mut BaselineState, u: &DynamicsField, cfg: &BaselineConfig) {
    let d = u.eval(&state.x);
    for ((x, p), d) in state.x.iter_mut().zip(state.p.iter_mut()).zip(&d) {
        *p = d + cfg.beta * *p;
        *x += cfg.alpha * *p;
    }
}

/// Nesterov's accelerated step with the `t` sequence starting at 1.
pub fn nag_step(state: &mut BaselineState, u: &DynamicsField, cfg: &BaselineConfig) {
    let t_next = (1.0 + (4.0 * state.t * state.t + 1.0).sqrt()) / 2.0;
    let d = u.eval(&state.x);
    let y: Vec<f64> = state.x.iter().zip(&d).map(|(x, d)| x + cfg.alpha * d).collect();
    let momentum = (state.t - 1.0) / t_next;
    for ((x, y), yp) in state.x.iter_mut().zip(&y).zip(&state.y_prev) {
        *x = y + momentum * (y - yp);
    }
    state.y_prev = y;
    state.t = t_next;
}

fn require_minmax(problem: &Problem) -> Result<()> {
    match problem.kind() {
        ProblemKind::MinMax { .. } => Ok(()),
        ProblemKind::Minimize => Err(AskError::NotMinMax(problem.name().to_string())),
    }
}

/// Simultaneous descent on the min block and ascent on the max block.
pub fn gda_step(state: &mut BaselineState, problem: &Problem, cfg: &BaselineConfig) -> Result<()> {
    require_minmax(problem)?;
    gd_step(state, &gradient_flow(problem), cfg);
    Ok(())
}

/// `x ← x + 2α u(x_k) − α u(x_{k−1})`; the first step uses `u(x_0)` for the
/// previous value and so equals a GDA step.
pub fn ogda_step(state: &mut BaselineState, problem: &Problem, cfg: &BaselineConfig) -> Result<()> {
    require_minmax(problem)?;
    ogda_field_step(state, &gradient_flow(problem), cfg);
    Ok(())
}

fn ogda_field_step(state: &mut BaselineState, u: &DynamicsField, cfg: &BaselineConfig) {
    let d = u.eval(&state.x);
    let prev = state.field_prev.take().unwrap_or_else(|| d.clone());
    for ((x, d), dp) in state.x.iter_mut().zip(&d).zip(&prev) {
        *x += 2.0 * cfg.alpha * d - cfg.alpha * dp;
    }
    state.field_prev = Some(d);
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineResult {
    pub x_final: Vec<f64>,
    pub grad_norm: f64,
    pub iterations: usize,
    pub status: Status,
}

/// Runs `cfg.method` from `x0` until `‖u(x)‖ <= tol`, `max_iters` steps, or
/// the iterate stops being finite.
pub fn run_baseline(problem: &Problem, x0: &[f64], cfg: &BaselineConfig) -> Result<BaselineResult> {
    cfg.validate()?;
    if cfg.method.requires_minmax() {
        require_minmax(problem)?;
    }
    if x0.len() != problem.dim() {
        return Err(AskError::DimensionMismatch { expected: problem.dim(), got: x0.len() });
    }
    let u = gradient_flow(problem);
    let mut state = BaselineState::new(x0);
    let mut k = 0;
    loop {
        let g = norm2(&u.eval(&state.x));
        let status = if !g.is_finite() || state.x.iter().any(|v| !v.is_finite()) {
            Some(Status::Failed)
        } else if g <= cfg.tol {
            Some(Status::Converged)
        } else if k >= cfg.max_iters {
            Some(Status::MaxIters)
        } else {
            None
        };
        if let Some(status) = status {
            return Ok(BaselineResult { x_final: state.x, grad_norm: g, iterations: k, status });
        }
        match cfg.method {
            Method::Gd | Method::Gda => gd_step(&mut state, &u, cfg),
            Method::Hb => hb_step(&mut state, &u, cfg),
            Method::Nag => nag_step(&mut state, &u, cfg),
            Method::Ogda => ogda_field_step(&mut state, &u, cfg),
        }
        k += 1;
    }
}
