//! `bethe-lab`: batch verification front-end for `bethe-core`.

pub mod app;
pub mod config;
pub mod report;
pub mod suites;

pub use app::{run_command, WORKERS_ENV};
pub use config::{ConfigError, RunConfig};
pub use report::{CheckRecord, Report};
pub use suites::{Lab, Suite};
