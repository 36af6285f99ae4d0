//! Reproducible experiment pipelines and their CSV / JSON outputs.

mod cli;
mod commands;
mod config;
mod table;

pub use cli::{run_cli, Cli};
pub use commands::{
    cmd_disorder_sweep, cmd_example5, cmd_fig2, cmd_fig3, cmd_verify, memory_budget_report,
    run_experiment, BudgetReport, Check, ExperimentOutput, FIDELITY_TOL, IDENTITY_TOL, ORACLE_TOL,
};
pub use config::{parse_n_range, Experiment, RunConfig};
pub use table::{mean_std, Cell, ResultTable};

use serde::Serialize;
use serde_json::Value;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use crate::error::Result;

/// Overrides the default output directory.
pub const OUT_DIR_ENV: &str = "QST_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "results";

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub experiment: Experiment,
    pub crate_version: String,
    pub config: RunConfig,
    pub seeds: Vec<u64>,
    pub files: Vec<String>,
    pub passed: bool,
    pub summary: Value,
    pub started_unix_s: f64,
    pub wall_clock_s: f64,
}

/// Comment lines written above every CSV body. They contain no timestamps,
/// so identical configurations give byte-identical files.
pub fn csv_preamble(config: &RunConfig) -> Result<Vec<String>> {
    Ok(vec![
        format!(
            "{} {} {}",
            env!("CARGO_PKG_NAME"),
            env!("CARGO_PKG_VERSION"),
            config.experiment
        ),
        format!("config {}", serde_json::to_string(config)?),
    ])
}

/// Writes `<table>.csv` for each table and `<experiment>_manifest.json`;
/// returns the manifest path.
pub fn write_outputs(
    out_dir: &Path,
    config: &RunConfig,
    output: &ExperimentOutput,
    started: SystemTime,
    elapsed: Duration,
) -> Result<PathBuf> {
    fs::create_dir_all(out_dir)?;
    let preamble = csv_preamble(config)?;
    let mut files = Vec::new();
    for table in &output.tables {
        let name = format!("{}.csv", table.name());
        table.write_csv(fs::File::create(out_dir.join(&name))?, &preamble)?;
        files.push(name);
    }
    let manifest = Manifest {
        experiment: output.experiment,
        crate_version: env!("CARGO_PKG_VERSION").into(),
        config: config.clone(),
        seeds: output.seeds.clone(),
        files,
        passed: output.passed,
        summary: output.summary.clone(),
        started_unix_s: started
            .duration_since(UNIX_EPOCH)
            .map_or(0.0, |d| d.as_secs_f64()),
        wall_clock_s: elapsed.as_secs_f64(),
    };
    let path = out_dir.join(format!("{}_manifest.json", output.experiment));
    fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(path)
}
