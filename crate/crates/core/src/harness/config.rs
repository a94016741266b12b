use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::control::PidGains;
use crate::error::{CeedsError, Result};
use crate::motif::AnalysisConfig;
use crate::plant::{parse_waveform, PlantParams, Waveform};

/// Full description of a paired experiment.
///
/// Loaded from flat `key = value` text; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub waveform: String,
    pub setpoint_rpm: f64,
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    /// `None` resolves to `duty_max * slope` once the transfer is fitted.
    pub integral_limit: Option<f64>,
    pub km: f64,
    pub window_length: usize,
    pub motif_count: usize,
    pub radius_factor: f64,
    pub min_amplitude: f64,
    pub analysis_cutoff: usize,
    pub hold_samples: usize,
    pub total_samples: usize,
    pub loop_ms: u32,
    pub ku: f64,
    pub tau: f64,
    pub noise_sigma: f64,
    pub duty_max: f64,
    pub seed: u64,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let analysis = AnalysisConfig::default();
        let plant = PlantParams::default();
        ExperimentConfig {
            waveform: "0*60,50*20".to_string(),
            setpoint_rpm: 400.0,
            kp: 0.2,
            ki: 0.0,
            kd: 0.0,
            integral_limit: None,
            km: 1.2,
            window_length: analysis.window_length,
            motif_count: analysis.motif_count,
            radius_factor: analysis.radius_factor,
            min_amplitude: analysis.min_amplitude,
            analysis_cutoff: analysis.analysis_cutoff,
            hold_samples: 40,
            total_samples: 1200,
            loop_ms: 50,
            ku: plant.ku,
            tau: plant.tau,
            noise_sigma: plant.noise_sigma,
            duty_max: 255.0,
            seed: 0,
            output_dir: PathBuf::from("ceeds-out"),
        }
    }
}

/// Keys accepted in config files, in echo order.
pub const CONFIG_KEYS: &[&str] = &[
    "waveform",
    "setpoint_rpm",
    "kp",
    "ki",
    "kd",
    "integral_limit",
    "km",
    "window_length",
    "motif_count",
    "radius_factor",
    "min_amplitude",
    "analysis_cutoff",
    "hold_samples",
    "total_samples",
    "loop_ms",
    "ku",
    "tau",
    "noise_sigma",
    "duty_max",
    "seed",
    "output_dir",
];

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| CeedsError::Config(format!("bad value for {key}: {value:?}")))
}

impl ExperimentConfig {
    /// Sets one field from its textual form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "waveform" => self.waveform = v.to_string(),
            "setpoint_rpm" => self.setpoint_rpm = parse_value(key, v)?,
            "kp" => self.kp = parse_value(key, v)?,
            "ki" => self.ki = parse_value(key, v)?,
            "kd" => self.kd = parse_value(key, v)?,
            "integral_limit" => {
                self.integral_limit = match v {
                    "" | "auto" => None,
                    _ => Some(parse_value(key, v)?),
                }
            }
            "km" => self.km = parse_value(key, v)?,
            "window_length" => self.window_length = parse_value(key, v)?,
            "motif_count" => self.motif_count = parse_value(key, v)?,
            "radius_factor" => self.radius_factor = parse_value(key, v)?,
            "min_amplitude" => self.min_amplitude = parse_value(key, v)?,
            "analysis_cutoff" => self.analysis_cutoff = parse_value(key, v)?,
            "hold_samples" => self.hold_samples = parse_value(key, v)?,
            "total_samples" => self.total_samples = parse_value(key, v)?,
            "loop_ms" => self.loop_ms = parse_value(key, v)?,
            "ku" => self.ku = parse_value(key, v)?,
            "tau" => self.tau = parse_value(key, v)?,
            "noise_sigma" => self.noise_sigma = parse_value(key, v)?,
            "duty_max" => self.duty_max = parse_value(key, v)?,
            "seed" => self.seed = parse_value(key, v)?,
            "output_dir" => self.output_dir = PathBuf::from(v),
            other => return Err(CeedsError::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines on top of the defaults. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut config = ExperimentConfig::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CeedsError::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            config.set(key, value)?;
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CeedsError::io(path, e))?;
        Self::parse(&text)
    }

    /// `(key, value)` pairs for every field, in [`CONFIG_KEYS`] order.
    pub fn to_pairs(&self) -> Vec<(String, String)> {
        let integral_limit = self
            .integral_limit
            .map_or_else(|| "auto".to_string(), |v| v.to_string());
        let values = [
            self.waveform.clone(),
            self.setpoint_rpm.to_string(),
            self.kp.to_string(),
            self.ki.to_string(),
            self.kd.to_string(),
            integral_limit,
            self.km.to_string(),
            self.window_length.to_string(),
            self.motif_count.to_string(),
            self.radius_factor.to_string(),
            self.min_amplitude.to_string(),
            self.analysis_cutoff.to_string(),
            self.hold_samples.to_string(),
            self.total_samples.to_string(),
            self.loop_ms.to_string(),
            self.ku.to_string(),
            self.tau.to_string(),
            self.noise_sigma.to_string(),
            self.duty_max.to_string(),
            self.seed.to_string(),
            self.output_dir.display().to_string(),
        ];
        CONFIG_KEYS
            .iter()
            .zip(values)
            .map(|(k, v)| (k.to_string(), v))
            .collect()
    }

    pub fn to_text(&self) -> String {
        self.to_pairs()
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    pub fn analysis_config(&self) -> AnalysisConfig {
        AnalysisConfig {
            window_length: self.window_length,
            motif_count: self.motif_count,
            radius_factor: self.radius_factor,
            min_amplitude: self.min_amplitude,
            analysis_cutoff: self.analysis_cutoff,
        }
    }

    pub fn plant_params(&self) -> PlantParams {
        PlantParams {
            ku: self.ku,
            tau: self.tau,
            noise_sigma: self.noise_sigma,
        }
    }

    pub fn gains(&self, slope: f64) -> PidGains {
        PidGains {
            kp: self.kp,
            ki: self.ki,
            kd: self.kd,
            integral_limit: self.integral_limit.unwrap_or(self.duty_max * slope),
        }
    }

    pub fn dt(&self) -> f64 {
        f64::from(self.loop_ms) / 1000.0
    }

    pub fn parsed_waveform(&self) -> Result<Waveform> {
        parse_waveform(&self.waveform)
    }

    /// Checks every invariant before any simulation starts.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(CeedsError::Config(msg));
        if self.loop_ms == 0 {
            return fail("loop_ms must be positive".into());
        }
        if self.total_samples <= self.analysis_cutoff + self.hold_samples {
            return fail(format!(
                "total_samples ({}) must exceed analysis_cutoff + hold_samples ({})",
                self.total_samples,
                self.analysis_cutoff + self.hold_samples
            ));
        }
        if !(self.setpoint_rpm > 0.0 && self.setpoint_rpm.is_finite()) {
            return fail("setpoint_rpm must be positive".into());
        }
        if !(self.duty_max > 0.0 && self.duty_max.is_finite()) {
            return fail("duty_max must be positive".into());
        }
        if !self.km.is_finite() {
            return fail("km must be finite".into());
        }
        let to_config = |e: CeedsError| CeedsError::Config(e.to_string());
        self.analysis_config().validate().map_err(to_config)?;
        self.plant_params().validate().map_err(to_config)?;
        self.gains(1.0).validate().map_err(to_config)?;
        self.parsed_waveform().map_err(to_config)?;
        Ok(())
    }
}
