//! Experiment orchestration: configuration, per-trial seeding, state-file
//! input, parallel trial execution and deterministic csv/json reports.

mod config;
mod experiment;
mod report;
mod seed;
mod statefile;
mod sweep;

pub use config::{Command, ExperimentConfig, OutputFormat, RuleSpec};
pub use experiment::run_experiment;
pub use report::{emit_report, parse_csv_report, parse_json_report, RecordValue, ReportRecord, CSV_COLUMNS};
pub use seed::{splitmix64, trial_seed};
pub use statefile::{parse_state_file, parse_state_str, StateDescription};
pub use sweep::sweep;
