//! Seeded multi-trial runs and their aggregation.
//!
//! Seeding scheme: trial `i` of a suite with master seed `s` uses
//! `splitmix64(splitmix64(s) + i)` (wrapping) as its own seed, so each trial
//! is reproducible on its own and every method sees the same initial points.
//! The initial point is drawn from a ChaCha8 stream seeded with that value:
//! each coordinate takes one `u64`, maps it to `[0, 1)` as
//! `(v >> 11) · 2⁻⁵³`, then scales into the problem's init interval.

use std::time::Instant;

use ask_core::baselines::run_baseline;
use ask_core::problems::{lookup, Problem};
use ask_core::{ask_optimize, AskError, Status};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Resolved, Solver, SuiteSpec};
use crate::error::Result;

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `index` under `master`.
pub fn trial_seed(master: u64, index: usize) -> u64 {
    splitmix64(splitmix64(master).wrapping_add(index as u64))
}

/// Uniform draw from `[0, 1)` using the top 53 bits.
fn unit_interval(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// One initial point from the problem's init box.
pub fn sample_init(problem: &Problem, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    problem.init_box().iter().map(|&(lo, hi)| lo + (hi - lo) * unit_interval(&mut rng)).collect()
}

/// `n_trials` initial points, trial `i` drawn with `trial_seed(seed, i)`.
pub fn sample_inits(problem: &Problem, n_trials: usize, seed: u64) -> Vec<Vec<f64>> {
    (0..n_trials).map(|i| sample_init(problem, trial_seed(seed, i))).collect()
}

/// JSON has no non-finite numbers; they travel as `"inf"`, `"-inf"` and
/// `"nan"`.
mod json_f64 {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "nan" => Ok(f64::NAN),
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                other => Err(D::Error::custom(format!("invalid number `{other}`"))),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub method: String,
    pub function: String,
    pub dim: usize,
    pub trial: usize,
    pub seed: u64,
    pub init: Vec<f64>,
    #[serde(with = "json_f64")]
    pub grad_norm: f64,
    pub iterations: usize,
    pub time_ms: f64,
    pub success: bool,
    pub status: String,
}

/// Aggregates for one (function, method) pair plus the settings used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub method: String,
    pub function: String,
    pub dim: usize,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    /// Mean over successful trials only.
    pub mean_grad_norm: Option<f64>,
    /// Mean over successful trials only.
    pub mean_time_ms: Option<f64>,
    pub tol: f64,
    pub max_iters: usize,
    pub radius: Option<f64>,
    pub level: Option<usize>,
    pub horizon: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub seed: u64,
    pub trials: usize,
    pub summary: Vec<SummaryRow>,
}

/// Mean of successful grad norms and times, and the success rate.
pub fn aggregate(records: &[&TrialRecord]) -> (usize, f64, Option<f64>, Option<f64>) {
    let ok: Vec<&&TrialRecord> = records.iter().filter(|r| r.success).collect();
    let n = ok.len();
    let rate = if records.is_empty() { 0.0 } else { n as f64 / records.len() as f64 };
    let mean = |f: fn(&TrialRecord) -> f64| -> Option<f64> {
        (n > 0).then(|| ok.iter().map(|r| f(r)).sum::<f64>() / n as f64)
    };
    (n, rate, mean(|r| r.grad_norm), mean(|r| r.time_ms))
}

struct Job {
    pair: usize,
    trial: usize,
}

struct Pair {
    function: String,
    solver: Solver,
    problem: Problem,
    resolved: Resolved,
}

fn prepare(spec: &SuiteSpec) -> Result<Vec<Pair>> {
    spec.validate()?;
    let mut pairs = Vec::new();
    for function in &spec.functions {
        for &solver in &spec.methods {
            let resolved = spec.resolve(function, solver);
            let problem = lookup(function, &resolved.problem)?;
            match solver {
                Solver::Ask => resolved.ask.validate()?,
                Solver::Baseline(m) => {
                    resolved.baseline.validate()?;
                    if m.requires_minmax() && !matches!(problem.kind(), ask_core::ProblemKind::MinMax { .. }) {
                        return Err(AskError::NotMinMax(format!("{} (method {})", function, m)).into());
                    }
                }
            }
            pairs.push(Pair { function: function.clone(), solver, problem, resolved });
        }
    }
    Ok(pairs)
}

fn run_trial(pair: &Pair, trial: usize, master_seed: u64) -> TrialRecord {
    let seed = trial_seed(master_seed, trial);
    let init = sample_init(&pair.problem, seed);
    let tol = pair.resolved.tol();

    let start = Instant::now();
    let outcome: std::result::Result<(f64, usize, Status), AskError> = match pair.solver {
        Solver::Ask => {
            ask_optimize(&pair.problem, &init, &pair.resolved.ask).map(|r| (r.grad_norm, r.outer_iters, r.status))
        }
        Solver::Baseline(_) => {
            run_baseline(&pair.problem, &init, &pair.resolved.baseline).map(|r| (r.grad_norm, r.iterations, r.status))
        }
    };
    let time_ms = start.elapsed().as_secs_f64() * 1e3;

    let (grad_norm, iterations, status) = outcome.unwrap_or((f64::NAN, 0, Status::Failed));
    TrialRecord {
        method: pair.solver.name().to_string(),
        function: pair.function.clone(),
        dim: pair.problem.dim(),
        trial,
        seed,
        init,
        grad_norm,
        iterations,
        time_ms,
        success: grad_norm <= tol,
        status: status.as_str().to_string(),
    }
}

/// Runs every (function, method, trial) combination. Records come back
/// ordered by function and method (in suite order), then trial index,
/// whether or not the run was parallel.
pub fn run_suite(spec: &SuiteSpec) -> Result<(BenchReport, Vec<TrialRecord>)> {
    let pairs = prepare(spec)?;
    let jobs: Vec<Job> =
        (0..pairs.len()).flat_map(|pair| (0..spec.trials).map(move |trial| Job { pair, trial })).collect();
    let run = |job: &Job| run_trial(&pairs[job.pair], job.trial, spec.seed);
    let records: Vec<TrialRecord> =
        if spec.parallel { jobs.par_iter().map(run).collect() } else { jobs.iter().map(run).collect() };

    let summary = pairs
        .iter()
        .enumerate()
        .map(|(idx, pair)| {
            let rows: Vec<&TrialRecord> = records[idx * spec.trials..(idx + 1) * spec.trials].iter().collect();
            summary_row(pair, &rows)
        })
        .collect();
    Ok((BenchReport { seed: spec.seed, trials: spec.trials, summary }, records))
}

fn summary_row(pair: &Pair, rows: &[&TrialRecord]) -> SummaryRow {
    let (successes, success_rate, mean_grad_norm, mean_time_ms) = aggregate(rows);
    let (ask, base) = (&pair.resolved.ask, &pair.resolved.baseline);
    let is_ask = pair.solver == Solver::Ask;
    let uses_beta = pair.solver == Solver::Baseline(ask_core::Method::Hb);
    SummaryRow {
        method: pair.solver.name().to_string(),
        function: pair.function.clone(),
        dim: pair.problem.dim(),
        trials: rows.len(),
        successes,
        success_rate,
        mean_grad_norm,
        mean_time_ms,
        tol: ask.tol,
        max_iters: ask.max_iters,
        radius: is_ask.then_some(ask.radius),
        level: is_ask.then_some(ask.level),
        horizon: is_ask.then_some(ask.horizon),
        alpha: (!is_ask).then_some(base.alpha),
        beta: uses_beta.then_some(base.beta),
    }
}
