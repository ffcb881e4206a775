//! Experiment harness around `gendiv-core`: config files, seeded runs,
//! λ grid search, CSV traces and genealogy logs.

pub mod config;
pub mod experiment;
pub mod genealogy_log;

pub use config::{ConfigError, RunConfig, Variant};
pub use experiment::{
    dump_genealogy, grid_search, run_experiment, CliError, GridReport, VariantRuns,
};
