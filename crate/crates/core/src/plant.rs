//! First-order DC motor stand-in with measurement noise and periodic,
//! software-injected interference.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{CeedsError, Result};

/// Name of the noise generator, echoed into experiment logs.
pub const NOISE_GENERATOR: &str = "ChaCha8Rng/StandardNormal";

/// One period of interference, as speed reductions in RPM.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    samples: Vec<f64>,
}

impl Waveform {
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(CeedsError::invalid("waveform needs at least one sample"));
        }
        if samples.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(CeedsError::invalid(
                "waveform samples must be finite and non-negative",
            ));
        }
        Ok(Waveform { samples })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn period(&self) -> usize {
        self.samples.len()
    }

    pub fn sample(&self, t: usize) -> f64 {
        self.samples[t % self.samples.len()]
    }
}

pub fn waveform_sample(w: &Waveform, t: usize) -> f64 {
    w.sample(t)
}

fn parse_number(text: &str, what: &str) -> std::result::Result<f64, String> {
    let v: f64 = text
        .trim()
        .parse()
        .map_err(|_| format!("{what} {:?} is not a number", text.trim()))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{what} must be finite"))
    }
}

fn parse_segment(seg: &str) -> std::result::Result<Vec<f64>, String> {
    if let Some(inner) = seg.strip_prefix("ramp(").and_then(|s| s.strip_suffix(')')) {
        let parts: Vec<&str> = inner.split(',').collect();
        let [a, b, s] = parts.as_slice() else {
            return Err("ramp takes three arguments (start, stop, step)".into());
        };
        let (start, stop, step) = (
            parse_number(a, "ramp start")?,
            parse_number(b, "ramp stop")?,
            parse_number(s, "ramp step")?,
        );
        if step == 0.0 {
            return Err("ramp step must be non-zero".into());
        }
        if (stop - start) * step < 0.0 {
            return Err("ramp step points away from the stop value".into());
        }
        let n = ((stop - start) / step).ceil() as usize;
        return Ok((0..n).map(|k| start + k as f64 * step).collect());
    }
    let (value, count) = seg
        .split_once('*')
        .ok_or_else(|| "expected V*N or ramp(A,B,S)".to_string())?;
    let value = parse_number(value, "value")?;
    let count: i64 = count
        .trim()
        .parse()
        .map_err(|_| format!("repeat count {:?} is not an integer", count.trim()))?;
    if count <= 0 {
        return Err("repeat count must be positive".into());
    }
    Ok(vec![value; count as usize])
}

/// Splits on commas that are not inside parentheses.
fn split_segments(spec: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in spec.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(&spec[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&spec[start..]);
    out
}

/// Parses the waveform DSL: comma-separated `V*N` and `ramp(A,B,S)`
/// segments, e.g. `0*45,ramp(50,0,-2)`. Ramps stop before `B`.
pub fn parse_waveform(spec: &str) -> Result<Waveform> {
    let mut samples = Vec::new();
    for (position, raw) in split_segments(spec).into_iter().enumerate() {
        let seg: String = raw.chars().filter(|c| !c.is_whitespace()).collect();
        let values = parse_segment(&seg).map_err(|reason| CeedsError::WaveformParse {
            position,
            segment: raw.trim().to_string(),
            reason,
        })?;
        samples.extend(values);
    }
    Waveform::new(samples)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantParams {
    /// Steady-state RPM per unit duty.
    pub ku: f64,
    /// First-order time constant in seconds.
    pub tau: f64,
    /// Measurement noise stddev in RPM.
    pub noise_sigma: f64,
}

impl Default for PlantParams {
    fn default() -> Self {
        PlantParams {
            ku: 2.0,
            tau: 0.25,
            noise_sigma: 2.0,
        }
    }
}

impl PlantParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.ku > 0.0 && self.ku.is_finite()) {
            return Err(CeedsError::invalid("ku must be positive"));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(CeedsError::invalid("tau must be positive"));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(CeedsError::invalid("noise_sigma must be non-negative"));
        }
        Ok(())
    }
}

/// Motor state; owns its noise generator so equal seeds give equal runs.
#[derive(Debug, Clone)]
pub struct PlantState {
    pub omega: f64,
    pub params: PlantParams,
    rng: ChaCha8Rng,
}

impl PlantState {
    pub fn new(params: PlantParams, seed: u64) -> Result<Self> {
        params.validate()?;
        Ok(PlantState {
            omega: 0.0,
            params,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    /// Advances one Euler step under `duty`; returns the measured RPM.
    ///
    /// The disturbance lowers the measured speed directly.
    pub fn step(&mut self, duty: f64, disturbance_rpm: f64, dt: f64) -> Result<f64> {
        if !duty.is_finite() {
            return Err(CeedsError::invalid("non-finite duty"));
        }
        if !disturbance_rpm.is_finite() {
            return Err(CeedsError::invalid("non-finite disturbance"));
        }
        if dt.is_nan() || dt <= 0.0 {
            return Err(CeedsError::invalid("dt must be positive"));
        }
        let p = &self.params;
        self.omega += (dt / p.tau) * (p.ku * duty - self.omega);
        let noise = if p.noise_sigma > 0.0 {
            let z: f64 = StandardNormal.sample(&mut self.rng);
            p.noise_sigma * z
        } else {
            0.0
        };
        Ok(self.omega - disturbance_rpm + noise)
    }
}

pub fn plant_step(state: &mut PlantState, duty: f64, disturbance_rpm: f64, dt: f64) -> Result<f64> {
    state.step(duty, disturbance_rpm, dt)
}
