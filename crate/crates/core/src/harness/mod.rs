//! Batch verification, evaluation commands and tables behind the CLI.
//!
//! Suites draw their parameters from a ChaCha stream seeded by
//! [`RunConfig::seed`], run instances in parallel and sort the reports, so
//! output depends only on the configuration.

mod commands;
mod config;
mod gen;
mod output;
mod suites;

pub use commands::{eval_command, parse_grid, table_command, EvalKind, EvalOutput, Table, TableKind, TableRow};
pub use config::{ModeName, OutputFormat, RunConfig, CONFIG_ENV};
pub use output::{eval_csv, reports_csv, runs_csv, table_csv, to_json};
pub use suites::{run_all, run_suite, Suite, SuiteRun, Summary};
