//! Iteration rules, preconditioning, cost accounting and the run loop.

pub mod config;
pub mod oracle;
pub mod precond;
pub mod run;
pub mod steppers;

pub use config::{Algorithm, HessInvMode, OptimizerConfig, Precondition};
pub use oracle::{Cost, Oracle};
pub use precond::{precondition_apply, PreconditionerState};
pub use run::{run, run_stochastic, MinibatchSampler, RunOutcome, RunStatus, StopCriteria};
pub use steppers::Optimizer;
