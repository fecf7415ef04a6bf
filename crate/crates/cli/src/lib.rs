//! Command-line front end for the Finsler identity suite: run
//! configurations, single checks, and JSON/CSV reports.

pub mod config;
pub mod metric_ref;
pub mod output;
pub mod runner;

use finsler_core::identity::{CheckKind, IdentityError};

pub use config::{ConfigError, Plan, RunConfig};
pub use metric_ref::{list_metrics, parse_metric_ref, RefError};
pub use runner::{run, RunReport, Summary};

/// The statement a check verifies.
pub fn describe_check(name: &str) -> Result<&'static str, IdentityError> {
    Ok(CheckKind::parse(name)?.description())
}
