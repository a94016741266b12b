//! Paired experiment orchestration: baseline and CEEDS runs over identical
//! interference and noise, reduction metrics, CSV logs and SVG charts.

pub mod config;
pub mod csv_log;
pub mod experiment;
pub mod plot;

use std::fs;
use std::path::Path;

pub use config::ExperimentConfig;
pub use csv_log::{format_real, parse_csv, read_csv, render_csv, write_csv, CSV_COLUMNS};
pub use experiment::{
    calibrate, calibration_ladder, error_reduction, median, reduction_from_errors, run_experiment,
    run_experiment_paced, run_single, sweep, sweep_table, ExperimentLog, SampleRecord, Summary,
    EARLY_REFERENCE_SAMPLE,
};
pub use plot::render_plots;

use crate::error::{CeedsError, Result};

pub const BASELINE_CSV: &str = "baseline.csv";
pub const CEEDS_CSV: &str = "ceeds.csv";
pub const SUMMARY_FILE: &str = "summary.txt";

/// Writes both logs, the charts and `summary.txt` into `dir`.
pub fn write_outputs(
    config: &ExperimentConfig,
    baseline: &ExperimentLog,
    ceeds: &ExperimentLog,
    dir: &Path,
) -> Result<Summary> {
    fs::create_dir_all(dir).map_err(|e| CeedsError::io(dir, e))?;
    write_csv(baseline, &dir.join(BASELINE_CSV))?;
    write_csv(ceeds, &dir.join(CEEDS_CSV))?;
    render_plots(
        baseline,
        ceeds,
        ceeds.chosen.as_ref(),
        config.analysis_cutoff,
        dir,
    )?;
    let summary = Summary::from_logs(config, baseline, ceeds)?;
    let path = dir.join(SUMMARY_FILE);
    fs::write(&path, summary.to_text()).map_err(|e| CeedsError::io(&path, e))?;
    Ok(summary)
}
