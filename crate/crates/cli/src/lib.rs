//! Batch front end: scenario files, report writers and the embedded
//! fixture suite.

pub mod error;
pub mod report;
pub mod run;
pub mod scenario;
pub mod selfcheck;
pub mod tolerance;

pub use error::CliError;
pub use run::{evaluate, run_scenario, RunOptions, RunOutcome};
pub use scenario::Scenario;
pub use tolerance::Tolerances;
