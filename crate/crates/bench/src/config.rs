//! Suite description and its plain-text config format.
//!
//! One `key = value` pair per line; `#` starts a comment. Global keys:
//!
//! ```text
//! function = camel3, rosenbrock
//! method = ask, gd, nag
//! trials = 100
//! seed = 7
//! parallel = true
//! out = results.csv
//! format = csv
//! level = 1
//! ```
//!
//! Tuning keys (`dim`, `radius`, `level`, `horizon`, `tol`, `max_iters`,
//! `alpha`, `beta`, `minmax_split`, `cond_target`) may be scoped to a
//! function or a method by prefixing the name, e.g. `rosenbrock.level = 3`
//! or `gd.alpha = 1e-3`. Resolution order, later wins: built-in defaults,
//! built-in per-function overrides, global keys, method-scoped keys,
//! function-scoped keys, command-line flags. Dashes and underscores are
//! interchangeable in keys.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use ask_core::baselines::{BaselineConfig, Method};
use ask_core::problems::{ProblemParams, PROBLEM_NAMES};
use ask_core::AskConfig;

use crate::error::{BenchError, Result};

/// An optimizer the harness can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Solver {
    Ask,
    Baseline(Method),
}

impl Solver {
    pub fn all() -> Vec<Solver> {
        std::iter::once(Solver::Ask).chain(Method::ALL.into_iter().map(Solver::Baseline)).collect()
    }

    pub fn name(self) -> &'static str {
        match self {
            Solver::Ask => "ask",
            Solver::Baseline(m) => m.as_str(),
        }
    }
}

impl FromStr for Solver {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        if s == "ask" {
            return Ok(Solver::Ask);
        }
        s.parse::<Method>()
            .map(Solver::Baseline)
            .map_err(|_| BenchError::Usage(format!("unknown method `{s}` (expected ask, gd, hb, nag, gda or ogda)")))
    }
}

impl std::fmt::Display for Solver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(BenchError::Usage(format!("unknown format `{s}` (expected csv or json)"))),
        }
    }
}

/// Tuning values that can be set at any layer; `None` defers to the layer
/// below.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    pub dim: Option<usize>,
    pub radius: Option<f64>,
    pub level: Option<usize>,
    pub horizon: Option<f64>,
    pub tol: Option<f64>,
    pub max_iters: Option<usize>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub minmax_split: Option<usize>,
    pub cond_target: Option<f64>,
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> std::result::Result<T, String> {
    value.parse().map_err(|_| format!("invalid value `{value}` for `{key}`"))
}

impl Settings {
    pub const KEYS: [&'static str; 10] =
        ["dim", "radius", "level", "horizon", "tol", "max_iters", "alpha", "beta", "minmax_split", "cond_target"];

    /// Sets one tuning key; `Ok(false)` if the key is not a tuning key.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<bool, String> {
        match key {
            "dim" => self.dim = Some(parse_value(key, value)?),
            "radius" => self.radius = Some(parse_value(key, value)?),
            "level" => self.level = Some(parse_value(key, value)?),
            "horizon" => self.horizon = Some(parse_value(key, value)?),
            "tol" => self.tol = Some(parse_value(key, value)?),
            "max_iters" => self.max_iters = Some(parse_value(key, value)?),
            "alpha" => self.alpha = Some(parse_value(key, value)?),
            "beta" => self.beta = Some(parse_value(key, value)?),
            "minmax_split" => self.minmax_split = Some(parse_value(key, value)?),
            "cond_target" => self.cond_target = Some(parse_value(key, value)?),
            _ => return Ok(false),
        }
        Ok(true)
    }

    /// `top` wins wherever it is set.
    pub fn overlay(&self, top: &Settings) -> Settings {
        Settings {
            dim: top.dim.or(self.dim),
            radius: top.radius.or(self.radius),
            level: top.level.or(self.level),
            horizon: top.horizon.or(self.horizon),
            tol: top.tol.or(self.tol),
            max_iters: top.max_iters.or(self.max_iters),
            alpha: top.alpha.or(self.alpha),
            beta: top.beta.or(self.beta),
            minmax_split: top.minmax_split.or(self.minmax_split),
            cond_target: top.cond_target.or(self.cond_target),
        }
    }
}

/// Per-function overrides applied unless the user sets the value: the
/// oscillatory and the curved-valley functions run at level 3.
pub fn builtin_overrides(function: &str) -> Settings {
    match function {
        "bohachevsky2" | "rosenbrock" => Settings { level: Some(3), ..Settings::default() },
        _ => Settings::default(),
    }
}

/// Fully resolved parameters for one (function, method) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub problem: ProblemParams,
    pub ask: AskConfig,
    pub baseline: BaselineConfig,
}

impl Resolved {
    pub fn tol(&self) -> f64 {
        self.ask.tol
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteSpec {
    pub functions: Vec<String>,
    pub methods: Vec<Solver>,
    pub trials: usize,
    pub seed: u64,
    pub parallel: bool,
    pub out: Option<PathBuf>,
    pub format: Format,
    /// Unscoped config keys.
    pub global: Settings,
    /// Keys scoped to a function or method name.
    pub scoped: BTreeMap<String, Settings>,
    /// Command-line values; win over everything.
    pub cli: Settings,
}

impl Default for SuiteSpec {
    fn default() -> Self {
        Self {
            functions: Vec::new(),
            methods: vec![Solver::Ask],
            trials: 100,
            seed: 0,
            parallel: false,
            out: None,
            format: Format::Csv,
            global: Settings::default(),
            scoped: BTreeMap::new(),
            cli: Settings::default(),
        }
    }
}

fn split_list(value: &str) -> Vec<String> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect()
}

fn parse_methods(value: &str) -> Result<Vec<Solver>> {
    split_list(value).iter().map(|s| s.parse()).collect()
}

impl SuiteSpec {
    /// Parses the config text on top of the defaults.
    pub fn parse_config(text: &str) -> Result<Self> {
        let mut spec = SuiteSpec::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let err = |message: String| BenchError::Config { line, message };
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) =
                content.split_once('=').ok_or_else(|| err(format!("expected `key = value`, got `{content}`")))?;
            let key = key.trim().replace('-', "_");
            let value = value.trim();

            if let Some((scope, sub)) = key.split_once('.') {
                let known_scope = PROBLEM_NAMES.contains(&scope) || Solver::all().iter().any(|s| s.name() == scope);
                if !known_scope {
                    return Err(err(format!("unknown scope `{scope}`")));
                }
                let settings = spec.scoped.entry(scope.to_string()).or_default();
                match settings.set(sub, value) {
                    Ok(true) => {}
                    Ok(false) => return Err(err(format!("`{sub}` cannot be scoped"))),
                    Err(m) => return Err(err(m)),
                }
                continue;
            }

            match key.as_str() {
                "function" | "functions" => spec.functions = split_list(value),
                "method" | "methods" => spec.methods = parse_methods(value).map_err(|e| err(e.to_string()))?,
                "trials" => spec.trials = parse_value(&key, value).map_err(err)?,
                "seed" => spec.seed = parse_value(&key, value).map_err(err)?,
                "parallel" => spec.parallel = parse_value(&key, value).map_err(err)?,
                "out" => spec.out = Some(PathBuf::from(value)),
                "format" => spec.format = value.parse().map_err(|e: BenchError| err(e.to_string()))?,
                _ => match spec.global.set(&key, value) {
                    Ok(true) => {}
                    Ok(false) => return Err(err(format!("unknown key `{key}`"))),
                    Err(m) => return Err(err(m)),
                },
            }
        }
        Ok(spec)
    }

    pub fn methods_from_list(value: &str) -> Result<Vec<Solver>> {
        parse_methods(value)
    }

    pub fn functions_from_list(value: &str) -> Vec<String> {
        split_list(value)
    }

    /// Checks names and counts before anything runs.
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(BenchError::Usage("trials must be >= 1".into()));
        }
        if self.functions.is_empty() && !self.methods.is_empty() {
            return Err(BenchError::Usage("no function given (use --function or `function =`)".into()));
        }
        for f in &self.functions {
            if !PROBLEM_NAMES.contains(&f.as_str()) {
                return Err(BenchError::Usage(format!("unknown function `{f}`")));
            }
        }
        Ok(())
    }

    /// Layers all settings for one (function, method) pair.
    pub fn resolve(&self, function: &str, solver: Solver) -> Resolved {
        let empty = Settings::default();
        let merged = builtin_overrides(function)
            .overlay(&self.global)
            .overlay(self.scoped.get(solver.name()).unwrap_or(&empty))
            .overlay(self.scoped.get(function).unwrap_or(&empty))
            .overlay(&self.cli);

        let ask_default = AskConfig::default();
        let ask = AskConfig {
            radius: merged.radius.unwrap_or(ask_default.radius),
            level: merged.level.unwrap_or(ask_default.level),
            horizon: merged.horizon.unwrap_or(ask_default.horizon),
            max_iters: merged.max_iters.unwrap_or(ask_default.max_iters),
            tol: merged.tol.unwrap_or(ask_default.tol),
            ..ask_default
        };
        let method = match solver {
            Solver::Baseline(m) => m,
            Solver::Ask => Method::Gd,
        };
        let base_default = BaselineConfig::new(method);
        let baseline = BaselineConfig {
            alpha: merged.alpha.unwrap_or(base_default.alpha),
            beta: merged.beta.unwrap_or(base_default.beta),
            max_iters: ask.max_iters,
            tol: ask.tol,
            ..base_default
        };
        let problem = ProblemParams {
            dim: merged.dim,
            minmax_split: merged.minmax_split,
            seed: self.seed,
            cond_target: merged.cond_target.unwrap_or(ProblemParams::default().cond_target),
        };
        Resolved { problem, ask, baseline }
    }
}
