//! Adaptive spectral Koopman optimization.
//!
//! Critical points of `f` (or saddle points of a min-max problem) are the
//! equilibria of the gradient flow `ẋ = u(x)`. The optimizer approximates the
//! Koopman generator of that flow on a small box around the current iterate
//! with sparse-grid Chebyshev collocation, evolves the state through the
//! generator's eigen-expansion, and re-centers until `‖u‖` is small.
//!
//! ```
//! use ask_core::{ask_optimize, problems, AskConfig, Status};
//!
//! let camel = problems::camel3();
//! let res = ask_optimize(&camel, &[0.5, -0.4], &AskConfig::default()).unwrap();
//! assert_eq!(res.status, Status::Converged);
//! assert!(res.grad_norm <= 1e-6);
//! ```

pub mod baselines;
pub mod error;
pub mod koopman;
pub mod optimizer;
pub mod problems;
pub mod sparse_grid;
pub mod spectral_basis;

pub use baselines::{run_baseline, BaselineConfig, BaselineResult, BaselineState, Method};
pub use error::{AskError, Result};
pub use koopman::{evolve_state, DynamicsField, SpectralSystem};
pub use optimizer::{ask_optimize, ask_optimize_field, ask_step, AskConfig, AskResult, Status, StepDiagnostics};
pub use problems::{gradient_flow, Problem, ProblemKind};
pub use sparse_grid::{smolyak_grid, BoxDomain, ReferenceGrid};
pub use spectral_basis::CollocationOperators;
