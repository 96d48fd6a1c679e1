use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use ask_bench::report::{json_document, summary_table, trials_csv};
use ask_bench::selfcheck::run_checks;
use ask_bench::{run_suite, write_report, BenchError, Format, Solver, SuiteSpec};
use ask_core::problems::{lookup, ProblemKind, ProblemParams, PROBLEM_NAMES};
use clap::{Args, Parser, Subcommand};

/// Adaptive spectral Koopman optimizer benchmarks.
#[derive(Parser)]
#[command(name = "ask-bench", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a suite from a config file and/or flags.
    Run(RunArgs),
    /// List the registered functions and methods.
    List,
    /// Run the invariant self-test.
    Check,
}

#[derive(Args)]
struct RunArgs {
    /// Suite config file (`key = value` lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Function name(s), comma separated.
    #[arg(long)]
    function: Option<String>,
    /// Method(s): ask, gd, hb, nag, gda, ogda; comma separated.
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    dim: Option<usize>,
    /// Trials per (function, method) [default: 100].
    #[arg(long)]
    trials: Option<usize>,
    /// Master seed [default: 0].
    #[arg(long)]
    seed: Option<u64>,
    /// ASK neighborhood radius [default: 0.1].
    #[arg(long)]
    radius: Option<f64>,
    /// ASK sparse-grid level [default: 1; 3 for bohachevsky2 and rosenbrock].
    #[arg(long)]
    level: Option<usize>,
    /// ASK evolution horizon [default: 100].
    #[arg(long)]
    horizon: Option<f64>,
    /// Gradient-norm tolerance [default: 1e-6].
    #[arg(long)]
    tol: Option<f64>,
    /// Iteration budget [default: 50000].
    #[arg(long)]
    max_iters: Option<usize>,
    /// Baseline step size [default: 0.01].
    #[arg(long)]
    alpha: Option<f64>,
    /// Heavy-ball momentum [default: 0.9].
    #[arg(long)]
    beta: Option<f64>,
    /// Number of minimized coordinates for dixon_price_minmax [default: dim/2].
    #[arg(long)]
    minmax_split: Option<usize>,
    /// Condition number of the generated least-squares matrix [default: 100].
    #[arg(long)]
    cond_target: Option<f64>,
    /// Output path; prints to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json [default: csv].
    #[arg(long)]
    format: Option<String>,
    /// Run trials on the rayon thread pool.
    #[arg(long)]
    parallel: bool,
}

fn build_spec(args: RunArgs) -> Result<SuiteSpec, BenchError> {
    let mut spec = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| BenchError::Io { path: path.clone(), source })?;
            SuiteSpec::parse_config(&text)?
        }
        None => SuiteSpec::default(),
    };
    if let Some(f) = &args.function {
        spec.functions = SuiteSpec::functions_from_list(f);
    }
    if let Some(m) = &args.method {
        spec.methods = SuiteSpec::methods_from_list(m)?;
    }
    if let Some(t) = args.trials {
        spec.trials = t;
    }
    if let Some(s) = args.seed {
        spec.seed = s;
    }
    if args.out.is_some() {
        spec.out = args.out;
    }
    if let Some(f) = &args.format {
        spec.format = f.parse()?;
    }
    spec.parallel |= args.parallel;
    spec.cli.dim = args.dim;
    spec.cli.radius = args.radius;
    spec.cli.level = args.level;
    spec.cli.horizon = args.horizon;
    spec.cli.tol = args.tol;
    spec.cli.max_iters = args.max_iters;
    spec.cli.alpha = args.alpha;
    spec.cli.beta = args.beta;
    spec.cli.minmax_split = args.minmax_split;
    spec.cli.cond_target = args.cond_target;
    Ok(spec)
}

fn run(args: RunArgs) -> Result<(), BenchError> {
    let spec = build_spec(args)?;
    let (report, records) = run_suite(&spec)?;
    match &spec.out {
        Some(path) => {
            let written = write_report(&report, &records, spec.format, path)?;
            for p in written {
                eprintln!("wrote {}", p.display());
            }
            eprint!("{}", summary_table(&report));
        }
        None => {
            let bytes = match spec.format {
                Format::Csv => trials_csv(&records)?,
                Format::Json => json_document(&report, &records)?,
            };
            std::io::stdout().write_all(&bytes).map_err(|source| BenchError::Io { path: "<stdout>".into(), source })?;
            eprint!("{}", summary_table(&report));
        }
    }
    Ok(())
}

fn list() {
    println!("functions:");
    for name in PROBLEM_NAMES {
        let p = lookup(name, &ProblemParams::default()).expect("registered problem");
        let kind = match p.kind() {
            ProblemKind::Minimize => "min".to_string(),
            ProblemKind::MinMax { split } => format!("min-max (split {split})"),
        };
        let (lo, hi) = p.init_box()[0];
        println!("  {name:<26} dim {:<4} {kind:<20} init [{lo}, {hi}]", p.dim());
    }
    println!("methods:");
    for s in Solver::all() {
        println!("  {s}");
    }
}

fn check() -> bool {
    let mut ok = true;
    for c in run_checks() {
        match c.result {
            Ok(()) => println!("PASS {}", c.name),
            Err(msg) => {
                ok = false;
                println!("FAIL {}: {msg}", c.name);
            }
        }
    }
    ok
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::Run(args) => match run(args) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(e.exit_code() as u8)
            }
        },
        Command::List => {
            list();
            ExitCode::SUCCESS
        }
        Command::Check => {
            if check() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
    }
}
