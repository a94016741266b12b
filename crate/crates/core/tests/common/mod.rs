#![allow(dead_code)]

use ceeds_core::matrix_profile::FLAT_EPSILON;
use ceeds_core::{
    mpx, tile_cancellation, top_motifs, AnalysisConfig, CancellationCycle, CeedsController, Phase,
    PidGains, PidState, PlantParams, PlantState, TimeSeries, TransferFunction,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub fn ts(values: Vec<f64>) -> TimeSeries {
    TimeSeries::from_values(values).unwrap()
}

/// Mean and population stddev computed directly, without any rolling update.
fn window_moments(w: &[f64]) -> (f64, f64) {
    let n = w.len() as f64;
    let mean = w.iter().sum::<f64>() / n;
    let var = w.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Euclidean distance between explicitly z-normalized windows.
pub fn oracle_distance(x: &[f64], i: usize, j: usize, m: usize) -> f64 {
    let (a, b) = (&x[i..i + m], &x[j..j + m]);
    let (ma, sa) = window_moments(a);
    let (mb, sb) = window_moments(b);
    match (sa < FLAT_EPSILON, sb < FLAT_EPSILON) {
        (true, true) => 0.0,
        (true, false) | (false, true) => (m as f64).sqrt(),
        _ => a
            .iter()
            .zip(b)
            .map(|(p, q)| {
                let d = (p - ma) / sa - (q - mb) / sb;
                d * d
            })
            .sum::<f64>()
            .sqrt(),
    }
}

/// All admissible `(distance, j)` pairs for subsequence `i`, sorted.
pub fn oracle_row(x: &[f64], i: usize, m: usize, radius: usize) -> Vec<(f64, usize)> {
    let count = x.len() + 1 - m;
    let mut row: Vec<(f64, usize)> = (0..count)
        .filter(|&j| i.abs_diff(j) > radius)
        .map(|j| (oracle_distance(x, i, j, m), j))
        .collect();
    row.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    row
}

/// Mixed random series: white noise, random walk, or noise with flat plateaus.
pub fn random_series(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let normal = Normal::new(0.0, 1.0).unwrap();
    match rng.random_range(0..3) {
        0 => (0..n).map(|_| normal.sample(rng)).collect(),
        1 => {
            let mut acc = 0.0;
            (0..n)
                .map(|_| {
                    acc += normal.sample(rng);
                    acc
                })
                .collect()
        }
        _ => {
            let mut v: Vec<f64> = (0..n).map(|_| 5.0 * normal.sample(rng)).collect();
            let start = rng.random_range(0..n / 2);
            let len = rng.random_range(1..=n / 3);
            let level = normal.sample(rng);
            for x in v.iter_mut().skip(start).take(len) {
                *x = level;
            }
            v
        }
    }
}

/// A square pulse train (`width` samples at `amplitude`, zero elsewhere)
/// with period `period`, first pulse at `phase`, plus gaussian noise.
pub struct PlantedSquare {
    pub values: Vec<f64>,
    pub period: usize,
    pub width: usize,
    pub phase: usize,
}

impl PlantedSquare {
    pub fn random(rng: &mut ChaCha8Rng, n: usize) -> Self {
        let period = rng.random_range(60..=120);
        let width = rng.random_range(10..=30);
        let phase = rng.random_range(0..period);
        let amplitude = rng.random_range(20.0..80.0);
        let sigma = amplitude / 10.0;
        let noise = Normal::new(0.0, sigma).unwrap();
        let values = (0..n)
            .map(|t| {
                let pos = (t + period - phase) % period;
                let clean = if pos < width { amplitude } else { 0.0 };
                clean + noise.sample(rng)
            })
            .collect();
        PlantedSquare {
            values,
            period,
            width,
            phase,
        }
    }

    /// Pulse start indices, including a partial one cut by index 0.
    pub fn starts(&self) -> impl Iterator<Item = i64> + '_ {
        let p = self.period as i64;
        let first = self.phase as i64 - p;
        (0..)
            .map(move |k| first + k * p)
            .take_while(move |&s| s < self.values.len() as i64)
    }

    /// True when the noise-free content of `[start, start + m)` changes
    /// level, i.e. the window covers a rising or falling pulse edge.
    pub fn window_has_edge(&self, start: usize, m: usize) -> bool {
        let (a, b) = (start as i64, (start + m) as i64);
        self.starts().any(|s| {
            let fall = s + self.width as i64;
            (s > a && s < b) || (fall > a && fall < b)
        })
    }
}

pub type Check = Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

pub fn check_mpx_matches_oracle(values: &[f64], m: usize) -> Check {
    let radius = m.div_ceil(2);
    let p = mpx(&ts(values.to_vec()), m, radius).map_err(|e| e.to_string())?;
    for i in 0..p.len() {
        let row = oracle_row(values, i, m, radius);
        let (best, best_j) = row[0];
        ensure((p.distances[i] - best).abs() <= 1e-9, || {
            format!("i={i}: mpx {} vs oracle {best}", p.distances[i])
        })?;
        let gap = row.get(1).map_or(f64::INFINITY, |r| r.0 - best);
        if gap > 1e-7 {
            ensure(p.neighbor_indices[i] == best_j, || {
                format!("i={i}: neighbor {} vs {best_j}", p.neighbor_indices[i])
            })?;
        }
    }
    Ok(())
}

pub fn check_profile_bounds(values: &[f64], m: usize) -> Check {
    let radius = m.div_ceil(2);
    let p = mpx(&ts(values.to_vec()), m, radius).map_err(|e| e.to_string())?;
    let cap = 2.0 * (m as f64).sqrt() + 1e-9;
    for (i, (&d, &j)) in p.distances.iter().zip(&p.neighbor_indices).enumerate() {
        ensure(i.abs_diff(j) > radius, || {
            format!("i={i} neighbor {j} inside exclusion")
        })?;
        ensure((0.0..=cap).contains(&d), || {
            format!("i={i} distance {d} out of range")
        })?;
    }
    Ok(())
}

fn planted_motif_indices(values: Vec<f64>, m: usize) -> Result<Vec<Vec<usize>>, String> {
    let n = values.len();
    let series = ts(values);
    let profile = mpx(&series, m, m.div_ceil(2)).map_err(|e| e.to_string())?;
    let config = AnalysisConfig {
        window_length: m,
        analysis_cutoff: n,
        ..AnalysisConfig::default()
    };
    let motifs = top_motifs(&series, &profile, &config).map_err(|e| e.to_string())?;
    Ok(motifs.into_iter().map(|m| m.occurrences).collect())
}

/// Rank-1 motif occurrences are unchanged by `a * x + b` with `a > 0`.
pub fn check_affine_motif_indices(seed: u64, a: f64, b: f64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let planted = PlantedSquare::random(&mut rng, 400);
    let base = planted_motif_indices(planted.values.clone(), 35)?;
    let moved = planted_motif_indices(planted.values.iter().map(|v| a * v + b).collect(), 35)?;
    ensure(!base.is_empty() && base.first() == moved.first(), || {
        format!(
            "rank-1 occurrences {:?} vs {:?}",
            base.first(),
            moved.first()
        )
    })
}

pub fn check_affine_profile(values: &[f64], m: usize, a: f64, b: f64) -> Check {
    let radius = m.div_ceil(2);
    let p = mpx(&ts(values.to_vec()), m, radius).map_err(|e| e.to_string())?;
    let q = mpx(&ts(values.iter().map(|v| a * v + b).collect()), m, radius)
        .map_err(|e| e.to_string())?;
    for (i, (x, y)) in p.distances.iter().zip(&q.distances).enumerate() {
        ensure((x - y).abs() < 1e-6, || format!("i={i}: {x} vs {y}"))?;
    }
    Ok(())
}

pub fn check_anti_windup(gains: PidGains, errors: &[f64], dt: f64) -> Check {
    let mut state = PidState::default();
    let mut prev: Option<f64> = None;
    for &e in errors {
        let (out, next) = ceeds_core::pid_step(&state, &gains, e, dt).map_err(|x| x.to_string())?;
        ensure(next.integral.abs() <= gains.integral_limit, || {
            format!(
                "integral {} beyond limit {}",
                next.integral, gains.integral_limit
            )
        })?;
        let deriv = prev.map_or(0.0, |p| (e - p).abs() / dt);
        let bound = gains.kp.abs() * e.abs()
            + gains.ki.abs() * gains.integral_limit
            + gains.kd.abs() * deriv;
        ensure(out.abs() <= bound * (1.0 + 1e-12) + 1e-12, || {
            format!("output {out} above bound {bound}")
        })?;
        prev = Some(e);
        state = next;
    }
    Ok(())
}

fn test_transfer() -> TransferFunction {
    TransferFunction::new(2.0, 0.0, 255.0).unwrap()
}

fn small_analysis(cutoff: usize) -> AnalysisConfig {
    AnalysisConfig {
        window_length: 8,
        motif_count: 3,
        analysis_cutoff: cutoff,
        ..AnalysisConfig::default()
    }
}

/// Phases observed over a run never move backwards and never mix the two
/// terminal phases.
pub fn check_phase_monotonic(measurements: &[f64], cutoff: usize, hold: usize) -> Check {
    let gains = PidGains {
        kp: 0.2,
        ki: 0.5,
        kd: 0.0,
        integral_limit: 100.0,
    };
    let mut c = CeedsController::new(
        gains,
        1.0,
        test_transfer(),
        100.0,
        small_analysis(cutoff),
        hold,
        50,
    )
    .map_err(|e| e.to_string())?;
    let mut last = Phase::Collect;
    let mut terminal: Option<Phase> = None;
    for (t, &y) in measurements.iter().enumerate() {
        let r = c.step(y, t, 0.05).map_err(|e| e.to_string())?;
        ensure(r.phase.order() >= last.order(), || {
            format!("t={t}: {} after {}", r.phase, last)
        })?;
        if r.phase.order() == 2 {
            ensure(terminal.is_none_or(|p| p == r.phase), || {
                "mixed terminal phases".into()
            })?;
            terminal = Some(r.phase);
        }
        ensure(r.phase == Phase::Apply || r.cancellation_rpm == 0.0, || {
            format!("t={t}: cancellation outside apply")
        })?;
        let expected = if t < cutoff {
            Phase::Collect
        } else if t < cutoff + hold {
            Phase::Hold
        } else {
            r.phase
        };
        ensure(r.phase == expected, || format!("t={t}: phase {}", r.phase))?;
        last = r.phase;
    }
    Ok(())
}

/// With `km = 0` every non-hold step equals plain PIDF on the same inputs.
pub fn check_km_zero_is_pidf(measurements: &[f64], cutoff: usize) -> Check {
    let gains = PidGains {
        kp: 0.3,
        ki: 1.0,
        kd: 0.01,
        integral_limit: 50.0,
    };
    let tf = test_transfer();
    let setpoint = 100.0;
    let mut c = CeedsController::new(gains, 0.0, tf, setpoint, small_analysis(cutoff), 0, 50)
        .map_err(|e| e.to_string())?;
    let mut state = PidState::default();
    for (t, &y) in measurements.iter().enumerate() {
        let r = c.step(y, t, 0.05).map_err(|e| e.to_string())?;
        let e = y - setpoint;
        let (pid, next) =
            ceeds_core::pid_step(&state, &gains, -e, 0.05).map_err(|x| x.to_string())?;
        state = next;
        let duty = tf.clamp_duty(tf.inverse(setpoint) + tf.rpm_to_duty_delta(pid));
        ensure(r.duty.to_bits() == duty.to_bits(), || {
            format!("t={t} ({}): {} vs {duty}", r.phase, r.duty)
        })?;
    }
    Ok(())
}

pub fn check_tiling(cycle: &CancellationCycle, length: usize) -> Check {
    let out = tile_cancellation(cycle, length);
    let p = cycle.modal_period();
    ensure(out.len() == length, || "length".into())?;
    for t in 0..length {
        ensure(out[t] == cycle.value_at(t), || {
            format!("t={t}: value_at mismatch")
        })?;
        let k = (t as i64 - cycle.offset as i64).rem_euclid(p as i64) as usize;
        ensure(out[t] == cycle.cycle_values[k], || {
            format!("t={t}: index mismatch")
        })?;
        if t + p < length {
            ensure(out[t] == out[t + p], || format!("t={t}: not periodic"))?;
        }
    }
    Ok(())
}

pub fn check_transfer_round_trip(slope: f64, intercept: f64, rpm: f64) -> Check {
    let tf = TransferFunction::new(slope, intercept, 255.0).map_err(|e| e.to_string())?;
    let back = tf.forward(tf.inverse(rpm));
    ensure((back - rpm).abs() <= 1e-9 * (1.0 + rpm.abs()), || {
        format!("forward(inverse({rpm})) = {back}")
    })?;
    let d = tf.inverse(rpm);
    ensure(
        (tf.inverse(tf.forward(d)) - d).abs() <= 1e-9 * (1.0 + d.abs()),
        || "inverse(forward(d))".into(),
    )
}

pub fn check_plant_steady_state(ku: f64, tau: f64, duty: f64, seed: u64) -> Check {
    let dt = 0.05;
    let params = PlantParams {
        ku,
        tau,
        noise_sigma: 0.0,
    };
    let mut plant = PlantState::new(params, seed).map_err(|e| e.to_string())?;
    let steps = (20.0 * tau / dt).ceil() as usize;
    let mut y = 0.0;
    for _ in 0..steps {
        y = plant.step(duty, 0.0, dt).map_err(|e| e.to_string())?;
    }
    ensure((y - ku * duty).abs() < 1e-6 * (1.0 + ku * duty), || {
        format!("measured {y} vs {}", ku * duty)
    })?;
    let noisy = PlantParams {
        noise_sigma: 2.0,
        ..params
    };
    let mut a = PlantState::new(noisy, seed).map_err(|e| e.to_string())?;
    let mut b = PlantState::new(noisy, seed).map_err(|e| e.to_string())?;
    for t in 0..50 {
        let (x, z) = (
            a.step(duty, 3.0, dt).map_err(|e| e.to_string())?,
            b.step(duty, 3.0, dt).map_err(|e| e.to_string())?,
        );
        ensure(x.to_bits() == z.to_bits(), || {
            format!("t={t}: runs diverge")
        })?;
    }
    Ok(())
}

pub fn series_strategy(max_len: usize) -> impl Strategy<Value = (u64, usize, usize)> {
    (any::<u64>(), prop::sample::select(vec![4usize, 8, 16, 35])).prop_flat_map(move |(seed, m)| {
        let min = 2 * m + 4;
        (Just(seed), Just(m), min..=max_len.max(min))
    })
}

pub fn gains_strategy() -> impl Strategy<Value = PidGains> {
    (-5.0..5.0f64, -5.0..5.0f64, -1.0..1.0f64, 0.0..100.0f64).prop_map(
        |(kp, ki, kd, integral_limit)| PidGains {
            kp,
            ki,
            kd,
            integral_limit,
        },
    )
}

pub fn cycle_strategy() -> impl Strategy<Value = (CancellationCycle, usize)> {
    (1usize..40, 0usize..40, 0usize..200, 1usize..300).prop_flat_map(|(m, pad, offset, len)| {
        (
            prop::collection::vec(-100.0..100.0f64, m),
            Just(pad),
            Just(offset),
            Just(len),
        )
            .prop_map(|(motif, pad, offset, len)| {
                let m = motif.len();
                let mut values = motif;
                values.resize(m + pad, 0.0);
                (
                    CancellationCycle {
                        cycle_values: values,
                        offset,
                        source_rank: 1,
                        motif_length: m,
                    },
                    len,
                )
            })
    })
}

/// Measurement trace: noisy pulses around the setpoint or plain noise.
pub fn measurement_trace(seed: u64, n: usize, period: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 1.0).unwrap();
    let pulsed = rng.random_bool(0.7);
    (0..n)
        .map(|t| {
            let pulse = if pulsed && t % period < period / 3 {
                -30.0
            } else {
                0.0
            };
            100.0 + pulse + noise.sample(&mut rng)
        })
        .collect()
}
