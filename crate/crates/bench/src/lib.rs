//! Benchmark harness for the adaptive spectral Koopman optimizer: seeded
//! multi-trial suites, CSV/JSON reports and an invariant self-test.

pub mod config;
pub mod error;
pub mod report;
pub mod selfcheck;
pub mod suite;

pub use config::{Format, Settings, Solver, SuiteSpec};
pub use error::{BenchError, Result};
pub use report::{read_trials_csv, write_report, CsvRow};
pub use suite::{run_suite, sample_inits, BenchReport, SummaryRow, TrialRecord};
