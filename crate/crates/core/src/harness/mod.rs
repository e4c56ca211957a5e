//! Reproducible experiment drivers: configuration, sweeps with resume,
//! aggregation and plot-ready output.

mod config;
mod plot;
mod runner;

use std::path::{Path, PathBuf};

pub use config::{load_config, parse_config, ConfigError, ConfigIssue, ExperimentConfig, ScheduleExponents};
pub use plot::{emit_plot_data, PlotData, PlotKind, PlotRow};
pub use runner::{
    config_hash, record_file_name, run_digest, run_experiment, run_trial, trial_seed, ExperimentRecord, FitOutcome,
    Kappa, RateReport, RunOptions, RunOutcome, Timings, TrialFailure, SUMMARY_COLUMNS,
};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("record {path} was written by a different configuration")]
    ForeignRecord { path: PathBuf },
    #[error("missing columns: {}", .missing.join(", "))]
    MissingColumns { missing: Vec<String> },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Runtime(String),
}

impl HarnessError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.to_path_buf(), source }
    }
}
