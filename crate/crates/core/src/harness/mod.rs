//! Experiment harness: configuration, dispatch, reports and CSV tables.

mod config;
mod report;
mod run;
mod sources;
pub mod suite;
mod tables;

pub use config::{
    parse_config, parse_config_at, validate, Caps, CommandKind, ExperimentConfig, FreeSetConfig, GroupPreset,
    MatrixSource, Params, RandomKind, Scale, StateSource, SuiteConfig, DEFAULT_SEED,
};
pub use report::{Report, ReportHeader, RunRecord, Summary, REPORT_FILE, TIMINGS_FILE};
pub use run::run_command;
pub use sources::{build_free_set, preset_state, resolve_state, PRESETS};
pub use tables::{checks_table, emit_tables, format_sig12, read_csv, write_csv, Cell, Table};

/// Version of the report and table layouts.
pub const SCHEMA_VERSION: u32 = 1;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "ERASURE_OUT_DIR";
/// Output directory when neither a flag, the config nor the environment names one.
pub const DEFAULT_OUT_DIR: &str = "erasure-out";
