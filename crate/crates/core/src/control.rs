//! PID + feedforward control extended with a matrix-profile cancellation
//! term.
//!
//! The controller runs through a fixed phase sequence:
//!
//! * `Collect`: PIDF control while the error log fills up to the analysis
//!   cutoff. The step that logs the last sample runs the analysis pipeline.
//! * `Hold`: the compute window of a single-threaded controller. Duty is
//!   pinned to the feedforward value and PID state is frozen.
//! * `Apply`: PIDF plus `km` times the chosen cancellation cycle, converted
//!   from RPM to duty through the transfer slope.
//! * `FallbackPidf`: analysis found no usable candidate; plain PIDF.

use std::fmt;
use std::str::FromStr;

use crate::cancellation::{build_cycle, score_candidates, select_best, CancellationCycle};
use crate::error::{CeedsError, Result};
use crate::matrix_profile::{default_exclusion_radius, mpx, TimeSeries};
use crate::motif::{motif_features, top_motifs, AnalysisConfig, FeatureSet, Motif};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PidGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    /// Bound on the magnitude of the accumulated `error * dt`.
    pub integral_limit: f64,
}

impl PidGains {
    pub fn validate(&self) -> Result<()> {
        if ![self.kp, self.ki, self.kd].iter().all(|g| g.is_finite()) {
            return Err(CeedsError::invalid("PID gains must be finite"));
        }
        if self.integral_limit.is_nan() || self.integral_limit < 0.0 {
            return Err(CeedsError::invalid("integral_limit must be >= 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PidState {
    pub integral: f64,
    pub previous_error: f64,
    pub initialized: bool,
}

/// One PID update. The derivative term is zero on the first step.
pub fn pid_step(
    state: &PidState,
    gains: &PidGains,
    error: f64,
    dt: f64,
) -> Result<(f64, PidState)> {
    if !error.is_finite() {
        return Err(CeedsError::invalid("non-finite error"));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(CeedsError::invalid("dt must be positive"));
    }
    let limit = gains.integral_limit;
    let integral = (state.integral + error * dt).clamp(-limit, limit);
    let derivative = if state.initialized {
        (error - state.previous_error) / dt
    } else {
        0.0
    };
    let out = gains.kp * error + gains.ki * integral + gains.kd * derivative;
    Ok((
        out,
        PidState {
            integral,
            previous_error: error,
            initialized: true,
        },
    ))
}

/// Static affine map from duty to steady-state RPM.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferFunction {
    /// RPM per unit duty.
    pub slope: f64,
    pub intercept: f64,
    pub duty_max: f64,
}

impl TransferFunction {
    pub fn new(slope: f64, intercept: f64, duty_max: f64) -> Result<Self> {
        if !slope.is_finite() || slope <= 0.0 {
            return Err(CeedsError::NonInvertible(slope));
        }
        if !intercept.is_finite() {
            return Err(CeedsError::invalid("intercept must be finite"));
        }
        if !(duty_max > 0.0 && duty_max.is_finite()) {
            return Err(CeedsError::invalid("duty_max must be positive"));
        }
        Ok(TransferFunction {
            slope,
            intercept,
            duty_max,
        })
    }

    pub fn forward(&self, duty: f64) -> f64 {
        self.slope * duty + self.intercept
    }

    pub fn inverse(&self, rpm: f64) -> f64 {
        (rpm - self.intercept) / self.slope
    }

    /// Duty change that produces an RPM change of `rpm`.
    pub fn rpm_to_duty_delta(&self, rpm: f64) -> f64 {
        rpm / self.slope
    }

    pub fn clamp_duty(&self, duty: f64) -> f64 {
        duty.clamp(0.0, self.duty_max)
    }

    pub fn with_duty_max(self, duty_max: f64) -> Result<Self> {
        Self::new(self.slope, self.intercept, duty_max)
    }
}

/// Least-squares line through `(duty, steady_rpm)` points. The duty domain
/// runs up to the largest calibrated duty.
pub fn fit_transfer(calibration: &[(f64, f64)]) -> Result<TransferFunction> {
    if calibration
        .iter()
        .any(|(d, r)| !d.is_finite() || !r.is_finite())
    {
        return Err(CeedsError::invalid("calibration points must be finite"));
    }
    let n = calibration.len() as f64;
    if calibration.len() < 2 {
        return Err(CeedsError::DegenerateFit);
    }
    let mean_d = calibration.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_r = calibration.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = calibration.iter().map(|p| (p.0 - mean_d).powi(2)).sum();
    if sxx == 0.0 {
        return Err(CeedsError::DegenerateFit);
    }
    let sxy: f64 = calibration
        .iter()
        .map(|p| (p.0 - mean_d) * (p.1 - mean_r))
        .sum();
    let slope = sxy / sxx;
    let duty_max = calibration.iter().map(|p| p.0).fold(f64::MIN, f64::max);
    TransferFunction::new(slope, mean_r - slope * mean_d, duty_max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Phase {
    Collect,
    Hold,
    Apply,
    FallbackPidf,
}

impl Phase {
    pub fn as_str(&self) -> &'static str {
        match self {
            Phase::Collect => "collect",
            Phase::Hold => "hold",
            Phase::Apply => "apply",
            Phase::FallbackPidf => "fallback",
        }
    }

    /// Position in the phase order; the two terminal phases share a rank.
    pub fn order(&self) -> u8 {
        match self {
            Phase::Collect => 0,
            Phase::Hold => 1,
            Phase::Apply | Phase::FallbackPidf => 2,
        }
    }
}

impl FromStr for Phase {
    type Err = CeedsError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "collect" => Ok(Phase::Collect),
            "hold" => Ok(Phase::Hold),
            "apply" => Ok(Phase::Apply),
            "fallback" => Ok(Phase::FallbackPidf),
            other => Err(CeedsError::invalid(format!("unknown phase {other:?}"))),
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Everything the analysis pipeline produced, kept for logging.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisOutcome {
    pub motifs: Vec<Motif>,
    pub features: Vec<Option<FeatureSet>>,
    pub candidates: Vec<CancellationCycle>,
    pub scores: Vec<f64>,
    pub chosen: Option<CancellationCycle>,
}

/// mpx, motif discovery, feature extraction, cycle construction and
/// retroactive ranking over a collected error log.
///
/// Motifs whose features or cycle cannot be built are dropped from the
/// ranking. `chosen` is `None` when nothing survives.
pub fn run_analysis(error_log: &TimeSeries, config: &AnalysisConfig) -> Result<AnalysisOutcome> {
    let m = config.window_length;
    let profile = mpx(error_log, m, default_exclusion_radius(m))?;
    let motifs = top_motifs(error_log, &profile, config)?;
    let features: Vec<Option<FeatureSet>> =
        motifs.iter().map(|mo| motif_features(mo).ok()).collect();
    let candidates: Vec<CancellationCycle> = motifs
        .iter()
        .zip(&features)
        .filter_map(|(mo, f)| f.as_ref().and_then(|f| build_cycle(mo, f).ok()))
        .collect();
    let scores = score_candidates(error_log, &candidates);
    let chosen = select_best(error_log, &candidates).ok();
    Ok(AnalysisOutcome {
        motifs,
        features,
        candidates,
        scores,
        chosen,
    })
}

/// What a single controller step did.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    pub duty: f64,
    /// `measured - setpoint`.
    pub error: f64,
    /// Phase the step was computed in.
    pub phase: Phase,
    /// `km` times the cycle value, in RPM; zero outside `Apply`.
    pub cancellation_rpm: f64,
}

#[derive(Debug, Clone)]
pub struct CeedsController {
    gains: PidGains,
    km: f64,
    transfer: TransferFunction,
    setpoint_rpm: f64,
    analysis: AnalysisConfig,
    hold_samples: usize,
    phase: Phase,
    pid_state: PidState,
    error_log: TimeSeries,
    pending: Option<CancellationCycle>,
    chosen: Option<CancellationCycle>,
    outcome: Option<AnalysisOutcome>,
    next_index: usize,
}

impl CeedsController {
    pub fn new(
        gains: PidGains,
        km: f64,
        transfer: TransferFunction,
        setpoint_rpm: f64,
        analysis: AnalysisConfig,
        hold_samples: usize,
        sample_period_ms: u32,
    ) -> Result<Self> {
        gains.validate()?;
        analysis.validate()?;
        if !km.is_finite() {
            return Err(CeedsError::invalid("km must be finite"));
        }
        if !(setpoint_rpm > 0.0 && setpoint_rpm.is_finite()) {
            return Err(CeedsError::invalid("setpoint must be positive"));
        }
        Ok(CeedsController {
            gains,
            km,
            transfer,
            setpoint_rpm,
            analysis,
            hold_samples,
            phase: Phase::Collect,
            pid_state: PidState::default(),
            error_log: TimeSeries::new(
                Vec::with_capacity(analysis.analysis_cutoff),
                sample_period_ms,
            )?,
            pending: None,
            chosen: None,
            outcome: None,
            next_index: 0,
        })
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn pid_state(&self) -> &PidState {
        &self.pid_state
    }

    pub fn error_log(&self) -> &TimeSeries {
        &self.error_log
    }

    /// The applied cycle; present only in `Apply`.
    pub fn chosen(&self) -> Option<&CancellationCycle> {
        self.chosen.as_ref()
    }

    pub fn analysis_outcome(&self) -> Option<&AnalysisOutcome> {
        self.outcome.as_ref()
    }

    pub fn transfer(&self) -> &TransferFunction {
        &self.transfer
    }

    pub fn feedforward(&self) -> f64 {
        self.transfer.inverse(self.setpoint_rpm)
    }

    fn pid_correction(&mut self, error: f64, dt: f64) -> Result<f64> {
        // PID acts on setpoint - measured.
        let (out, next) = pid_step(&self.pid_state, &self.gains, -error, dt)?;
        self.pid_state = next;
        Ok(out)
    }

    fn finish_hold(&mut self) {
        match self.pending.take() {
            Some(cycle) => {
                self.chosen = Some(cycle);
                self.phase = Phase::Apply;
            }
            None => self.phase = Phase::FallbackPidf,
        }
    }

    fn analyze(&mut self) {
        match run_analysis(&self.error_log, &self.analysis) {
            Ok(outcome) => {
                self.pending = outcome.chosen.clone();
                self.outcome = Some(outcome);
            }
            Err(_) => self.pending = None,
        }
        self.phase = Phase::Hold;
        if self.hold_samples == 0 {
            self.finish_hold();
        }
    }

    /// Advances the controller by one sample and returns the duty to apply.
    pub fn step(&mut self, measured_rpm: f64, sample_index: usize, dt: f64) -> Result<StepReport> {
        if !measured_rpm.is_finite() {
            return Err(CeedsError::invalid("non-finite measurement"));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(CeedsError::invalid("dt must be positive"));
        }
        if sample_index != self.next_index {
            return Err(CeedsError::invalid(format!(
                "expected sample index {}, got {sample_index}",
                self.next_index
            )));
        }
        let error = measured_rpm - self.setpoint_rpm;
        let ff = self.feedforward();
        let phase = self.phase;
        let mut cancellation_rpm = 0.0;

        let duty = match phase {
            Phase::Collect => {
                let pid = self.pid_correction(error, dt)?;
                self.error_log.push(error)?;
                if self.error_log.len() >= self.analysis.analysis_cutoff {
                    self.analyze();
                }
                ff + self.transfer.rpm_to_duty_delta(pid)
            }
            Phase::Hold => {
                let hold_end = self.analysis.analysis_cutoff + self.hold_samples;
                if sample_index + 1 >= hold_end {
                    self.finish_hold();
                }
                ff
            }
            Phase::Apply => {
                let pid = self.pid_correction(error, dt)?;
                let cycle = self.chosen.as_ref().expect("Apply phase holds a cycle");
                cancellation_rpm = self.km * cycle.value_at(sample_index);
                ff + self.transfer.rpm_to_duty_delta(pid + cancellation_rpm)
            }
            Phase::FallbackPidf => {
                let pid = self.pid_correction(error, dt)?;
                ff + self.transfer.rpm_to_duty_delta(pid)
            }
        };

        self.next_index += 1;
        Ok(StepReport {
            duty: self.transfer.clamp_duty(duty),
            error,
            phase,
            cancellation_rpm,
        })
    }
}
