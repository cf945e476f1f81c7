//! Config-driven experiments: parse a TOML config, prepare the environment
//! and schedules, run seeded replicates and write CSV traces plus metadata.
//!
//! Output files in the output directory:
//!
//! * `trace_runNNN.csv`: `run_id,checkpoint,samples,deployments,dist_sq,perf_risk,status`
//! * `aggregate.csv`: `checkpoint,samples,deployments,mean_dist_sq,lo,hi,n_runs`
//! * `metadata.toml`: the effective config under `[config]` and resolved
//!   values (constants, θ_PS, seeds, schedule details) under `[resolved]`.
//!
//! Floats are written with 17 significant digits. A metadata file is itself
//! a valid config, and re-running it reproduces the CSV files byte for byte.

mod config;
mod prepare;
mod runner;

pub use config::*;
pub use prepare::{geometric_grid, DataInfo, Experiment, Plan};
pub use runner::{
    aggregate, aggregate_csv, trace_csv, trace_file_name, write_atomic, AggregateRow, ExperimentSummary,
    RunSummary, AGGREGATE_HEADER, TRACE_HEADER,
};

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::data::DataError;
use crate::params::ParamVector;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error(transparent)]
    Data(#[from] DataError),

    #[error(transparent)]
    Core(#[from] crate::Error),

    #[error("cannot access {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Runtime(String),
}

impl ExperimentError {
    /// True for problems with the config itself, as opposed to failures
    /// while loading data or running.
    pub fn is_validation(&self) -> bool {
        matches!(self, ExperimentError::Config(_))
    }
}

/// A parsed config plus the stable point cached in a metadata file, if any.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigDocument {
    pub config: ExperimentConfig,
    pub cached_stable_point: Option<ParamVector>,
}

/// Parses a config or metadata document.
pub fn parse_document(text: &str) -> Result<ConfigDocument, ConfigError> {
    let config = parse_config(text)?;
    let cached_stable_point = text
        .parse::<toml::Table>()
        .ok()
        .and_then(|t| {
            let resolved = t.get("resolved")?.as_table()?;
            if resolved.get("stable_point_source")?.as_str()? != "rrm_empirical" {
                return None;
            }
            let v = resolved.get("theta_ps")?.as_array()?;
            v.iter().map(|x| x.as_float()).collect::<Option<Vec<f64>>>()
        })
        .map(ParamVector::new);
    Ok(ConfigDocument {
        config,
        cached_stable_point,
    })
}

/// Reads and parses a config file.
pub fn load_document(path: &Path) -> Result<ConfigDocument, ExperimentError> {
    let text = std::fs::read_to_string(path).map_err(|source| ExperimentError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(parse_document(&text)?)
}

/// Prepares and runs `config`, writing all outputs to `out_dir`.
pub fn run_experiment(
    config: ExperimentConfig,
    out_dir: &Path,
    jobs: usize,
) -> Result<ExperimentSummary, ExperimentError> {
    let mut config = config;
    config.output.dir = Some(out_dir.to_string_lossy().into_owned());
    Experiment::prepare(config, None)?.run_to_dir(out_dir, jobs)
}
