use std::thread;
use std::time::Duration;

use rayon::prelude::*;

use super::config::ExperimentConfig;
use crate::cancellation::CancellationCycle;
use crate::control::{fit_transfer, AnalysisOutcome, CeedsController, Phase, TransferFunction};
use crate::error::{CeedsError, Result};
use crate::plant::{PlantParams, PlantState, NOISE_GENERATOR};

/// Early reference sample for the reduction metric, past motor start-up.
pub const EARLY_REFERENCE_SAMPLE: usize = 55;

/// Keeps the calibration ladder's noise stream apart from the run stream.
const CALIBRATION_STREAM: u64 = 0x9e37_79b9_7f4a_7c15;

const LADDER_STEPS: usize = 10;
const SETTLE_SAMPLES: usize = 100;
const AVERAGE_SAMPLES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleRecord {
    pub sample_index: usize,
    pub time_ms: u64,
    pub phase: Phase,
    pub setpoint_rpm: f64,
    pub measured_rpm: f64,
    pub error: f64,
    pub duty: f64,
    pub interference_rpm: f64,
    pub cancellation_rpm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentLog {
    /// Ordered `key=value` metadata: config echo, generator, fitted transfer.
    pub header: Vec<(String, String)>,
    pub records: Vec<SampleRecord>,
    pub chosen: Option<CancellationCycle>,
    pub analysis: Option<AnalysisOutcome>,
}

impl ExperimentLog {
    pub fn errors(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.error).collect()
    }

    pub fn header_value(&self, key: &str) -> Option<&str> {
        self.header
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// First sample index logged in `phase`.
    pub fn first_in_phase(&self, phase: Phase) -> Option<usize> {
        self.records
            .iter()
            .find(|r| r.phase == phase)
            .map(|r| r.sample_index)
    }
}

/// Open-loop duty ladder: settles the plant at each duty step and averages
/// the measured speed. Returns `(duty, steady_rpm)` points.
pub fn calibration_ladder(
    params: PlantParams,
    duty_max: f64,
    dt: f64,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    let mut plant = PlantState::new(params, seed ^ CALIBRATION_STREAM)?;
    let mut points = Vec::with_capacity(LADDER_STEPS + 1);
    for k in 0..=LADDER_STEPS {
        let duty = duty_max * k as f64 / LADDER_STEPS as f64;
        let mut sum = 0.0;
        for i in 0..SETTLE_SAMPLES {
            let y = plant.step(duty, 0.0, dt)?;
            if i >= SETTLE_SAMPLES - AVERAGE_SAMPLES {
                sum += y;
            }
        }
        points.push((duty, sum / AVERAGE_SAMPLES as f64));
    }
    Ok(points)
}

/// Fits the transfer function used by both runs of an experiment.
pub fn calibrate(config: &ExperimentConfig) -> Result<(Vec<(f64, f64)>, TransferFunction)> {
    let points = calibration_ladder(
        config.plant_params(),
        config.duty_max,
        config.dt(),
        config.seed,
    )?;
    let transfer = fit_transfer(&points)?.with_duty_max(config.duty_max)?;
    Ok((points, transfer))
}

fn header_for(
    config: &ExperimentConfig,
    run: &str,
    km: f64,
    transfer: &TransferFunction,
) -> Vec<(String, String)> {
    let mut header = vec![("run".to_string(), run.to_string())];
    header.extend(config.to_pairs());
    header.extend([
        ("applied_km".to_string(), km.to_string()),
        ("generator".to_string(), NOISE_GENERATOR.to_string()),
        ("transfer_slope".to_string(), transfer.slope.to_string()),
        (
            "transfer_intercept".to_string(),
            transfer.intercept.to_string(),
        ),
        (
            "resolved_integral_limit".to_string(),
            config.gains(transfer.slope).integral_limit.to_string(),
        ),
    ]);
    header
}

/// One closed-loop run with the given `km`. `pace` sleeps between samples.
pub fn run_single(
    config: &ExperimentConfig,
    transfer: &TransferFunction,
    km: f64,
    run: &str,
    pace: Option<Duration>,
) -> Result<ExperimentLog> {
    let waveform = config.parsed_waveform()?;
    let dt = config.dt();
    let mut plant = PlantState::new(config.plant_params(), config.seed)?;
    let mut controller = CeedsController::new(
        config.gains(transfer.slope),
        km,
        *transfer,
        config.setpoint_rpm,
        config.analysis_config(),
        config.hold_samples,
        config.loop_ms,
    )?;

    let mut records = Vec::with_capacity(config.total_samples);
    let mut duty = 0.0;
    for t in 0..config.total_samples {
        let interference = waveform.sample(t);
        let measured = plant.step(duty, interference, dt)?;
        let report = controller.step(measured, t, dt)?;
        duty = report.duty;
        records.push(SampleRecord {
            sample_index: t,
            time_ms: t as u64 * u64::from(config.loop_ms),
            phase: report.phase,
            setpoint_rpm: config.setpoint_rpm,
            measured_rpm: measured,
            error: report.error,
            duty,
            interference_rpm: interference,
            cancellation_rpm: report.cancellation_rpm,
        });
        if let Some(p) = pace {
            thread::sleep(p);
        }
    }

    let mut header = header_for(config, run, km, transfer);
    let chosen = controller.chosen().cloned();
    if let Some(c) = &chosen {
        header.extend([
            ("chosen_offset".to_string(), c.offset.to_string()),
            (
                "chosen_modal_period".to_string(),
                c.modal_period().to_string(),
            ),
            ("chosen_source_rank".to_string(), c.source_rank.to_string()),
            (
                "chosen_motif_length".to_string(),
                c.motif_length.to_string(),
            ),
            (
                "chosen_cycle_values".to_string(),
                c.cycle_values
                    .iter()
                    .map(|v| super::csv_log::format_real(*v))
                    .collect::<Vec<_>>()
                    .join(";"),
            ),
        ]);
    }
    Ok(ExperimentLog {
        header,
        records,
        chosen,
        analysis: controller.analysis_outcome().cloned(),
    })
}

/// Paired baseline (`km = 0`) and CEEDS runs over identical interference
/// and noise streams.
pub fn run_experiment(config: &ExperimentConfig) -> Result<(ExperimentLog, ExperimentLog)> {
    run_experiment_paced(config, None)
}

pub fn run_experiment_paced(
    config: &ExperimentConfig,
    pace: Option<Duration>,
) -> Result<(ExperimentLog, ExperimentLog)> {
    config.validate()?;
    let (_, transfer) = calibrate(config)?;
    let baseline = run_single(config, &transfer, 0.0, "baseline", pace)?;
    let ceeds = run_single(config, &transfer, config.km, "ceeds", pace)?;
    Ok((baseline, ceeds))
}

/// `100 * (1 - sum|e_ceeds| / sum|e_base|)` over samples from `from_sample` on.
pub fn reduction_from_errors(baseline: &[f64], ceeds: &[f64], from_sample: usize) -> Result<f64> {
    if baseline.len() != ceeds.len() {
        return Err(CeedsError::invalid(format!(
            "log lengths differ ({} vs {})",
            baseline.len(),
            ceeds.len()
        )));
    }
    if from_sample >= baseline.len() {
        return Err(CeedsError::invalid(format!(
            "from_sample {from_sample} beyond log length {}",
            baseline.len()
        )));
    }
    let base: f64 = baseline[from_sample..].iter().map(|e| e.abs()).sum();
    let with: f64 = ceeds[from_sample..].iter().map(|e| e.abs()).sum();
    if base == 0.0 {
        return Err(CeedsError::UndefinedMetric);
    }
    Ok(100.0 * (1.0 - with / base))
}

pub fn error_reduction(
    baseline: &ExperimentLog,
    ceeds: &ExperimentLog,
    from_sample: usize,
) -> Result<f64> {
    reduction_from_errors(&baseline.errors(), &ceeds.errors(), from_sample)
}

/// Headline numbers of one paired run.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub seed: u64,
    pub waveform: String,
    pub early_sample: usize,
    pub late_sample: usize,
    pub reduction_early: f64,
    pub reduction_late: f64,
    pub apply_start: Option<usize>,
    pub chosen_period: Option<usize>,
    pub chosen_offset: Option<usize>,
    pub chosen_rank: Option<usize>,
}

impl Summary {
    pub fn from_logs(
        config: &ExperimentConfig,
        baseline: &ExperimentLog,
        ceeds: &ExperimentLog,
    ) -> Result<Self> {
        let late = config.analysis_cutoff;
        Ok(Summary {
            seed: config.seed,
            waveform: config.waveform.clone(),
            early_sample: EARLY_REFERENCE_SAMPLE,
            late_sample: late,
            reduction_early: error_reduction(baseline, ceeds, EARLY_REFERENCE_SAMPLE)?,
            reduction_late: error_reduction(baseline, ceeds, late)?,
            apply_start: ceeds.first_in_phase(Phase::Apply),
            chosen_period: ceeds.chosen.as_ref().map(|c| c.modal_period()),
            chosen_offset: ceeds.chosen.as_ref().map(|c| c.offset),
            chosen_rank: ceeds.chosen.as_ref().map(|c| c.source_rank),
        })
    }

    pub fn to_text(&self) -> String {
        let opt = |v: Option<usize>| v.map_or_else(|| "none".to_string(), |v| v.to_string());
        format!(
            "seed: {}\nwaveform: {}\nreduction from sample {}: {:.2}%\nreduction from sample {}: {:.2}%\napply phase starts at: {}\nchosen modal period: {}\nchosen offset: {}\nchosen source rank: {}\n",
            self.seed,
            self.waveform,
            self.early_sample,
            self.reduction_early,
            self.late_sample,
            self.reduction_late,
            opt(self.apply_start),
            opt(self.chosen_period),
            opt(self.chosen_offset),
            opt(self.chosen_rank),
        )
    }
}

/// Runs one paired experiment per seed, in parallel; results keep seed order.
pub fn sweep(config: &ExperimentConfig, seeds: &[u64]) -> Result<Vec<Summary>> {
    seeds
        .par_iter()
        .map(|&seed| {
            let cfg = ExperimentConfig {
                seed,
                ..config.clone()
            };
            let (baseline, ceeds) = run_experiment(&cfg)?;
            Summary::from_logs(&cfg, &baseline, &ceeds)
        })
        .collect()
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len().is_multiple_of(2) {
        (v[mid - 1] + v[mid]) / 2.0
    } else {
        v[mid]
    })
}

/// Plain-text table of a sweep with medians.
pub fn sweep_table(rows: &[Summary]) -> String {
    let mut out = String::new();
    let (early, late) = rows.first().map_or((EARLY_REFERENCE_SAMPLE, 0), |r| {
        (r.early_sample, r.late_sample)
    });
    out.push_str(&format!(
        "{:>8} {:>12} {:>12} {:>8} {:>8}\n",
        "seed",
        format!("from {early}"),
        format!("from {late}"),
        "period",
        "offset"
    ));
    for r in rows {
        let opt = |v: Option<usize>| v.map_or_else(|| "-".to_string(), |v| v.to_string());
        out.push_str(&format!(
            "{:>8} {:>11.2}% {:>11.2}% {:>8} {:>8}\n",
            r.seed,
            r.reduction_early,
            r.reduction_late,
            opt(r.chosen_period),
            opt(r.chosen_offset)
        ));
    }
    let e: Vec<f64> = rows.iter().map(|r| r.reduction_early).collect();
    let l: Vec<f64> = rows.iter().map(|r| r.reduction_late).collect();
    if let (Some(me), Some(ml)) = (median(&e), median(&l)) {
        out.push_str(&format!("{:>8} {:>11.2}% {:>11.2}%\n", "median", me, ml));
    }
    out
}
