//! Scenario configuration, run orchestration, and artifact file formats:
//! the reproducibility surface of the crate.
//!
//! Exit-code contract of the `mvgf` binary: 0 on success (a detected
//! blow-up is a valid scientific outcome, not an error), 2 on configuration
//! errors, 3 on numerical failures.

pub mod io;
pub mod runner;
pub mod scenario;

pub use runner::{compare, error_exit_code, run_scenario, RunSummary, Subcommand};
pub use scenario::{parse_scenario, serialize_scenario, Scenario};
