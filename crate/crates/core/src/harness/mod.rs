//! Configuration files, CSV emission and the experiment runner that drives
//! the solvers from a single TOML document.

mod config;
mod io;
mod run;

use std::path::PathBuf;

use thiserror::Error;

pub use config::{
    parse_config, ExperimentConfig, ExperimentKind, FieldSource, GridConfig, RunConfig, SchemeSection, TimeConfig,
    DEFAULT_AMPLITUDE, DEFAULT_AMPLITUDES, DEFAULT_DELTAS, DEFAULT_DT, DEFAULT_J_MAX, DEFAULT_L, DEFAULT_N,
    DEFAULT_N_MAX, DEFAULT_OUTPUT_DIR, DEFAULT_T, DEFAULT_T_CAP,
};
pub use io::{emit_field_csv, field_table, format_real, read_field_csv, Cell, Table};
pub use run::{
    apply_env_overrides, run_experiment, stability_perturbation, ExperimentReport, Scalar, Verdict, BETA_SPREAD,
    CONTINUITY_TOL, FAMILY_SIZE, ITERATE_TOL, LIFESPAN_SPREAD, MEAN_TOL, PARTITION_TOL,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("malformed configuration: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {reason}", path.display())]
    Csv { path: PathBuf, reason: String },
    #[error("{context}: {source}")]
    Experiment {
        context: String,
        source: Box<dyn std::error::Error + Send + Sync>,
    },
}
