//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

mod common;

use std::fs;
use std::process::ExitCode;
use std::time::Instant;

use ceeds_core::harness::Summary;
use ceeds_core::harness::{run_experiment, sweep, write_outputs, ExperimentConfig};
use ceeds_core::{motif_features, mpx, top_motifs, AnalysisConfig};
use common::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SQUARE: &str = "0*60,50*20";
const SAWTOOTH: &str = "0*45,ramp(50,0,-2)";
const TRIANGLE: &str = "0*30,ramp(0,60,4),ramp(60,0,-4)";
const SEEDS: std::ops::Range<u64> = 0..10;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn mpx_exactness() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xA11CE);
    let sizes = [4usize, 8, 16, 35];
    let mut failures = Vec::new();
    for case in 0..200 {
        let m = sizes[case % sizes.len()];
        let n = rng.random_range(2 * m + 4..=256);
        let values = random_series(&mut rng, n);
        if let Err(e) = check_mpx_matches_oracle(&values, m) {
            failures.push(format!("case {case} (m={m}, n={n}): {e}"));
        }
    }
    let secs = started.elapsed().as_secs_f64();
    outcome(
        failures.is_empty() && secs < 30.0,
        format!(
            "200 series, {} mismatches, {secs:.2}s{}",
            failures.len(),
            failures
                .first()
                .map_or(String::new(), |f| format!("; first: {f}"))
        ),
    )
}

fn planted_recovery() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
    let config = AnalysisConfig::default();
    let m = config.window_length;
    let (mut period_ok, mut offset_ok) = (0, 0);
    for _ in 0..50 {
        let planted = PlantedSquare::random(&mut rng, config.analysis_cutoff);
        let series = ts(planted.values.clone());
        let profile = mpx(&series, m, m.div_ceil(2)).unwrap();
        let motifs = top_motifs(&series, &profile, &config).unwrap();
        let Some(first) = motifs.first() else {
            continue;
        };
        let f = motif_features(first).unwrap();
        if f.modal_period == planted.period {
            period_ok += 1;
        }
        // a true occurrence: a window covering a planted edge, repeated at
        // every period; all occurrences must sit within one sample of it
        let p = planted.period as i64;
        let phase_ok = first.occurrences.iter().all(|&o| {
            let r = (o as i64 - f.offset as i64).rem_euclid(p);
            r <= 1 || r >= p - 1
        });
        if phase_ok && planted.window_has_edge(f.offset, m) {
            offset_ok += 1;
        }
    }
    outcome(
        period_ok >= 48 && offset_ok >= 48,
        format!("modal period exact {period_ok}/50, offset on a true occurrence {offset_ok}/50 (need 48)"),
    )
}

fn sweep_waveform(waveform: &str) -> (Vec<Summary>, f64) {
    let config = ExperimentConfig {
        waveform: waveform.to_string(),
        ..ExperimentConfig::default()
    };
    let seeds: Vec<u64> = SEEDS.collect();
    let rows = sweep(&config, &seeds).unwrap();
    let late: Vec<f64> = rows.iter().map(|r| r.reduction_late).collect();
    (rows, ceeds_core::harness::median(&late).unwrap())
}

fn denial(name: &str, median: f64, threshold: f64, secs: f64) -> Outcome {
    outcome(
        median >= threshold && secs < 10.0 * SEEDS.count() as f64,
        format!(
            "{name}: median reduction from 600 = {median:.2}% (need >= {threshold}%), {secs:.2}s"
        ),
    )
}

fn early_ordering(rows: &[Summary]) -> Outcome {
    let passing: Vec<&Summary> = rows.iter().filter(|r| r.reduction_late >= 60.0).collect();
    let ordered = passing
        .iter()
        .filter(|r| r.reduction_early < r.reduction_late)
        .count();
    let all_ordered = rows
        .iter()
        .filter(|r| r.reduction_early < r.reduction_late)
        .count();
    outcome(
        ordered == passing.len(),
        format!(
            "{ordered}/{} passing square seeds ordered (from 55 < from 600); {all_ordered}/{} over all seeds",
            passing.len(),
            rows.len()
        ),
    )
}

fn km_zero_identity() -> Outcome {
    let mut bad = Vec::new();
    for waveform in [SQUARE, SAWTOOTH, TRIANGLE] {
        let config = ExperimentConfig {
            waveform: waveform.to_string(),
            km: 0.0,
            seed: 3,
            ..ExperimentConfig::default()
        };
        let (baseline, ceeds) = run_experiment(&config).unwrap();
        let same = baseline.records.len() == config.total_samples
            && baseline.records.len() == ceeds.records.len()
            && baseline.records.iter().zip(&ceeds.records).all(|(a, b)| {
                a.sample_index == b.sample_index
                    && a.phase == b.phase
                    && [
                        a.measured_rpm,
                        a.error,
                        a.duty,
                        a.interference_rpm,
                        a.cancellation_rpm,
                    ]
                    .iter()
                    .zip([
                        b.measured_rpm,
                        b.error,
                        b.duty,
                        b.interference_rpm,
                        b.cancellation_rpm,
                    ])
                    .all(|(x, y)| x.to_bits() == y.to_bits())
            });
        if !same {
            bad.push(waveform);
        }
    }
    outcome(
        bad.is_empty(),
        format!(
            "km = 0 paired logs bitwise identical for 3/3 waveforms{}",
            if bad.is_empty() {
                String::new()
            } else {
                format!("; differing: {bad:?}")
            }
        ),
    )
}

fn determinism() -> Outcome {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let config = ExperimentConfig {
        seed: 11,
        ..ExperimentConfig::default()
    };
    for dir in &dirs {
        let (b, c) = run_experiment(&config).unwrap();
        write_outputs(&config, &b, &c, dir.path()).unwrap();
    }
    let files = ["baseline.csv", "ceeds.csv", "summary.txt"];
    let differing: Vec<&str> = files
        .iter()
        .copied()
        .filter(|f| {
            fs::read(dirs[0].path().join(f)).unwrap() != fs::read(dirs[1].path().join(f)).unwrap()
        })
        .collect();
    outcome(
        differing.is_empty(),
        format!("{} files compared, differing: {differing:?}", files.len()),
    )
}

fn run_suite<S: proptest::strategy::Strategy>(
    cases: u32,
    strategy: S,
    check: impl Fn(S::Value) -> Check,
) -> Result<u32, String> {
    let mut runner = TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    });
    runner
        .run(&strategy, |v| check(v).map_err(TestCaseError::fail))
        .map(|_| cases)
        .map_err(|e| e.to_string())
}

fn invariant_suites() -> Outcome {
    use proptest::prelude::*;
    let suites: Vec<(&str, Result<u32, String>)> = vec![
        (
            "anti-windup",
            run_suite(
                300,
                (
                    gains_strategy(),
                    prop::collection::vec(-500.0..500.0f64, 1..200),
                    0.001..0.5f64,
                ),
                |(g, e, dt)| check_anti_windup(g, &e, dt),
            ),
        ),
        (
            "phase monotonicity",
            run_suite(
                150,
                (
                    any::<u64>(),
                    24usize..80,
                    0usize..12,
                    1usize..60,
                    8usize..20,
                ),
                |(seed, cutoff, hold, extra, period)| {
                    check_phase_monotonic(
                        &measurement_trace(seed, cutoff + hold + extra, period),
                        cutoff,
                        hold,
                    )
                },
            ),
        ),
        (
            "tiling periodicity",
            run_suite(300, cycle_strategy(), |(c, len)| check_tiling(&c, len)),
        ),
        (
            "affine motif indices",
            run_suite(
                60,
                (any::<u64>(), 0.1..10.0f64, -200.0..200.0f64),
                |(s, a, b)| check_affine_motif_indices(s, a, b),
            ),
        ),
        (
            "transfer round-trip",
            run_suite(
                300,
                (0.01..50.0f64, -500.0..500.0f64, -5000.0..5000.0f64),
                |(s, i, r)| check_transfer_round_trip(s, i, r),
            ),
        ),
        (
            "plant steady state",
            run_suite(
                200,
                (0.1..10.0f64, 0.06..2.0f64, 0.0..255.0f64, any::<u64>()),
                |(k, t, d, s)| check_plant_steady_state(k, t, d, s),
            ),
        ),
    ];
    let total: u32 = suites.iter().filter_map(|(_, r)| r.as_ref().ok()).sum();
    let failed: Vec<String> = suites
        .iter()
        .filter_map(|(name, r)| r.as_ref().err().map(|e| format!("{name}: {e}")))
        .collect();
    outcome(
        failed.is_empty() && total >= 1000,
        format!(
            "{} suites, {total} cases passed{}",
            suites.len(),
            failed.first().map_or(String::new(), |f| format!("; {f}"))
        ),
    )
}

fn main() -> ExitCode {
    let timed = |waveform: &str| {
        let t = Instant::now();
        let (rows, median) = sweep_waveform(waveform);
        (rows, median, t.elapsed().as_secs_f64())
    };
    let (square_rows, square, square_secs) = timed(SQUARE);
    let (_, saw, saw_secs) = timed(SAWTOOTH);
    let (_, tri, tri_secs) = timed(TRIANGLE);

    let results = [
        ("1 matrix-profile exactness", mpx_exactness()),
        ("2 planted-motif recovery", planted_recovery()),
        (
            "3 square-wave denial",
            denial("square", square, 60.0, square_secs),
        ),
        ("4 sawtooth denial", denial("sawtooth", saw, 55.0, saw_secs)),
        ("5 triangle denial", denial("triangle", tri, 55.0, tri_secs)),
        ("6 early-window ordering", early_ordering(&square_rows)),
        ("7 km = 0 degeneration", km_zero_identity()),
        ("8 determinism", determinism()),
        ("9 invariant suites", invariant_suites()),
    ];
    let mut failed = 0;
    for (name, o) in &results {
        println!(
            "{} criterion {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    println!(
        "acceptance: {}/{} passed",
        results.len() - failed,
        results.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
