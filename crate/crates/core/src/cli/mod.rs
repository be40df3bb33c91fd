//! Configuration files, CSV output and the experiment runner behind the
//! `iccon` binary.

mod config;
mod run;
mod table;

pub use config::{
    parse_config, ExperimentConfig, Scenario, ScenarioConfig, DEFAULT_REQUESTS_PER_SLOT,
    DEFAULT_SLOTS, KEYS,
};
pub use run::{
    churn_table, mean_std, per_request_table, run_experiment, sweep_table, PolicyChoice,
    RunManifest, RunReport, DEFAULT_SEEDS,
};
pub use table::{format_float, Cell, Table, SIGNIFICANT_DIGITS};
