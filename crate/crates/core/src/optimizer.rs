//! The adaptive outer loop: build a neighborhood box around the current
//! state, decompose the local generator, evolve to the horizon with
//! time-halving retraction, and re-center until the flow field vanishes.

use crate::error::{AskError, Result};
use crate::koopman::{evolve_state, DynamicsField, SpectralSystem};
use crate::problems::{gradient_flow, norm2, Problem};
use crate::sparse_grid::BoxDomain;
use crate::spectral_basis::CollocationOperators;

/// Outcome of an optimizer run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Converged,
    MaxIters,
    Failed,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::MaxIters => "max_iters",
            Status::Failed => "failed",
        }
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AskConfig {
    /// Neighborhood radius `r`.
    pub radius: f64,
    /// Sparse-grid level (>= 1).
    pub level: usize,
    /// Evolution horizon `T`.
    pub horizon: f64,
    pub max_iters: usize,
    /// Stop once `‖u(x)‖ <= tol`.
    pub tol: f64,
    /// Smallest evolution time tried before falling back; `None` means
    /// `1e-12 * horizon`.
    pub t_min: Option<f64>,
    /// Largest acceptable `cond(Φ)`.
    pub cond_cap: f64,
    /// Step size of the explicit fallback step.
    pub fallback_step: f64,
    pub record_trajectory: bool,
}

impl Default for AskConfig {
    fn default() -> Self {
        Self {
            radius: 1e-1,
            level: 1,
            horizon: 1e2,
            max_iters: 50_000,
            tol: 1e-6,
            t_min: None,
            cond_cap: 1e12,
            fallback_step: 1e-3,
            record_trajectory: false,
        }
    }
}

impl AskConfig {
    pub fn t_min(&self) -> f64 {
        self.t_min.unwrap_or(1e-12 * self.horizon)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("radius", self.radius),
            ("horizon", self.horizon),
            ("tol", self.tol),
            ("t_min", self.t_min()),
            ("cond_cap", self.cond_cap),
            ("fallback_step", self.fallback_step),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(AskError::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        if self.level == 0 {
            return Err(AskError::InvalidConfig("level must be >= 1".into()));
        }
        if self.max_iters == 0 {
            return Err(AskError::InvalidConfig("max_iters must be >= 1".into()));
        }
        if self.t_min() >= self.horizon {
            return Err(AskError::InvalidConfig("t_min must be below the horizon".into()));
        }
        Ok(())
    }
}

/// Why a step used the explicit fallback instead of the spectral solution.
#[derive(Debug, Clone, PartialEq)]
pub enum FallbackReason {
    /// Retraction reached `t_min` without landing in the box.
    RetractionExhausted,
    /// The decomposition or the mode solve failed.
    Spectral(AskError),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct StepDiagnostics {
    /// Evolution times tried, in order.
    pub tried_times: Vec<f64>,
    /// The accepted time, if the spectral solution was used.
    pub accepted_t: Option<f64>,
    pub fallback: Option<FallbackReason>,
    pub cond_phi: Option<f64>,
}

impl StepDiagnostics {
    pub fn retractions(&self) -> usize {
        self.tried_times.len().saturating_sub(1)
    }
}

/// Classical RK4 step of size `h` on `u`.
fn rk4_step(u: &DynamicsField, x: &[f64], h: f64) -> Vec<f64> {
    let k1 = u.eval(x);
    let shifted = |k: &[f64], s: f64| -> Vec<f64> { x.iter().zip(k).map(|(a, b)| a + s * b).collect() };
    let k2 = u.eval(&shifted(&k1, h / 2.0));
    let k3 = u.eval(&shifted(&k2, h / 2.0));
    let k4 = u.eval(&shifted(&k3, h));
    (0..x.len()).map(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect()
}

fn fallback(
    u: &DynamicsField,
    x: &[f64],
    bx: &BoxDomain,
    cfg: &AskConfig,
    mut diag: StepDiagnostics,
    reason: FallbackReason,
) -> Result<(Vec<f64>, StepDiagnostics)> {
    let mut next = rk4_step(u, x, cfg.fallback_step);
    if next.iter().any(|v| !v.is_finite()) {
        return Err(AskError::NonFiniteDynamics { point: x.to_vec() });
    }
    bx.clamp(&mut next);
    diag.fallback = Some(reason);
    Ok((next, diag))
}

/// One adaptive step from `x`.
///
/// The returned state always lies in `[x - r, x + r]`. Only
/// `NonFiniteDynamics` (and configuration errors) are returned as `Err`;
/// spectral failures and exhausted retraction go through the explicit
/// fallback step and are reported in the diagnostics.
pub fn ask_step(
    x: &[f64],
    u: &DynamicsField,
    ops: &CollocationOperators,
    cfg: &AskConfig,
) -> Result<(Vec<f64>, StepDiagnostics)> {
    let bx = BoxDomain::around(x, cfg.radius)?;
    let mut diag = StepDiagnostics::default();

    let sys = match SpectralSystem::build(ops, &bx, u, cfg.cond_cap) {
        Ok(sys) => sys,
        Err(e @ AskError::NonFiniteDynamics { .. }) => return Err(e),
        Err(e @ (AskError::DimensionMismatch { .. } | AskError::DegenerateBox { .. })) => return Err(e),
        Err(e) => return fallback(u, x, &bx, cfg, diag, FallbackReason::Spectral(e)),
    };
    diag.cond_phi = Some(sys.cond_phi);

    let t_min = cfg.t_min();
    let mut t = cfg.horizon;
    loop {
        diag.tried_times.push(t);
        match evolve_state(&sys, t) {
            Ok(xt) if bx.contains(&xt) => {
                diag.accepted_t = Some(t);
                return Ok((xt, diag));
            }
            // out of the box, overflowing, or too noisy: retract
            Ok(_) | Err(AskError::Overflow { .. }) | Err(AskError::NumericalNoise { .. }) => {}
            Err(e) => return Err(e),
        }
        let half = t / 2.0;
        if half < t_min {
            return fallback(u, x, &bx, cfg, diag, FallbackReason::RetractionExhausted);
        }
        t = half;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AskResult {
    pub x_final: Vec<f64>,
    /// `‖u(x_final)‖`, which equals `‖∇f(x_final)‖` for gradient flows.
    pub grad_norm: f64,
    pub outer_iters: usize,
    pub retractions_total: usize,
    pub fallbacks_total: usize,
    /// Iterates including `x0`, when requested.
    pub trajectory: Option<Vec<Vec<f64>>>,
    pub status: Status,
    pub error: Option<AskError>,
}

/// Runs the adaptive loop on an arbitrary field until `‖u(x)‖ <= tol` or
/// `max_iters` steps.
pub fn ask_optimize_field(u: &DynamicsField, x0: &[f64], cfg: &AskConfig) -> Result<AskResult> {
    cfg.validate()?;
    if x0.len() != u.dim() {
        return Err(AskError::DimensionMismatch { expected: u.dim(), got: x0.len() });
    }
    let ops = CollocationOperators::cached(u.dim(), cfg.level)?;

    let mut x = x0.to_vec();
    let mut trajectory = cfg.record_trajectory.then(|| vec![x.clone()]);
    let mut retractions_total = 0;
    let mut fallbacks_total = 0;
    let mut k = 0;
    let finish = |x: Vec<f64>, status, error, k, traj: Option<Vec<Vec<f64>>>, r, f| {
        let grad_norm = norm2(&u.eval(&x));
        AskResult {
            x_final: x,
            grad_norm,
            outer_iters: k,
            retractions_total: r,
            fallbacks_total: f,
            trajectory: traj,
            status,
            error,
        }
    };
    loop {
        let g = norm2(&u.eval(&x));
        if !g.is_finite() {
            let err = AskError::NonFiniteDynamics { point: x.clone() };
            return Ok(finish(x, Status::Failed, Some(err), k, trajectory, retractions_total, fallbacks_total));
        }
        if g <= cfg.tol {
            return Ok(finish(x, Status::Converged, None, k, trajectory, retractions_total, fallbacks_total));
        }
        if k >= cfg.max_iters {
            return Ok(finish(x, Status::MaxIters, None, k, trajectory, retractions_total, fallbacks_total));
        }
        match ask_step(&x, u, &ops, cfg) {
            Ok((next, diag)) => {
                retractions_total += diag.retractions();
                fallbacks_total += usize::from(diag.fallback.is_some());
                x = next;
                if let Some(t) = trajectory.as_mut() {
                    t.push(x.clone());
                }
            }
            Err(e) => {
                return Ok(finish(x, Status::Failed, Some(e), k, trajectory, retractions_total, fallbacks_total));
            }
        }
        k += 1;
    }
}

/// Runs the adaptive loop on the gradient flow of `problem`.
pub fn ask_optimize(problem: &Problem, x0: &[f64], cfg: &AskConfig) -> Result<AskResult> {
    ask_optimize_field(&gradient_flow(problem), x0, cfg)
}
