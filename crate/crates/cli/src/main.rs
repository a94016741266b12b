use std::path::PathBuf;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use ceeds_core::harness::{
    calibrate, run_experiment_paced, sweep, sweep_table, write_outputs, ExperimentConfig,
};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

#[derive(Parser)]
#[command(
    name = "ceeds",
    version,
    about = "Cyclical error detection and cancellation experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run paired baseline / CEEDS trials and write logs, charts and a summary.
    Run(RunArgs),
    /// Run a seed sweep and print a reduction table with medians.
    Sweep(SweepArgs),
    /// Run the open-loop duty ladder and print the fitted transfer function.
    Calibrate(CalibrateArgs),
}

#[derive(Args, Clone)]
struct Overrides {
    /// Flat `key = value` config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Interference waveform, e.g. `0*60,50*20` or `0*45,ramp(50,0,-2)`.
    #[arg(long)]
    waveform: Option<String>,
    /// Gain on the cancellation term.
    #[arg(long)]
    km: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    output: Option<PathBuf>,
}

impl Overrides {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut config = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(w) = &self.waveform {
            config.waveform = w.clone();
        }
        if let Some(km) = self.km {
            config.km = km;
        }
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(out) = &self.output {
            config.output_dir = out.clone();
        }
        config.validate()?;
        Ok(config)
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Overrides,
    /// Seed range `a..b` (half-open) or `a..=b`; one output directory per seed.
    #[arg(long)]
    seeds: Option<String>,
    /// Sleep `loop_ms` between samples.
    #[arg(long)]
    realtime: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Overrides,
    #[arg(long, default_value = "0..10")]
    seeds: String,
}

#[derive(Args)]
struct CalibrateArgs {
    #[command(flatten)]
    common: Overrides,
}

fn parse_seeds(text: &str) -> Result<Vec<u64>> {
    let (a, b, inclusive) = if let Some((a, b)) = text.split_once("..=") {
        (a, b, true)
    } else if let Some((a, b)) = text.split_once("..") {
        (a, b, false)
    } else {
        bail!("seed range must look like a..b or a..=b, got {text:?}");
    };
    let a: u64 = a.trim().parse().context("seed range start")?;
    let b: u64 = b.trim().parse().context("seed range end")?;
    let seeds: Vec<u64> = if inclusive {
        (a..=b).collect()
    } else {
        (a..b).collect()
    };
    if seeds.is_empty() {
        bail!("seed range {text:?} is empty");
    }
    Ok(seeds)
}

fn run(args: RunArgs) -> Result<()> {
    let base = args.common.resolve()?;
    let pace = args
        .realtime
        .then(|| Duration::from_millis(u64::from(base.loop_ms)));
    let seeds = match &args.seeds {
        Some(text) => Some(parse_seeds(text)?),
        None => None,
    };
    let jobs: Vec<(ExperimentConfig, PathBuf)> = match &seeds {
        None => vec![(base.clone(), base.output_dir.clone())],
        Some(seeds) => seeds
            .iter()
            .map(|&seed| {
                let dir = base.output_dir.join(format!("seed_{seed}"));
                (
                    ExperimentConfig {
                        seed,
                        ..base.clone()
                    },
                    dir,
                )
            })
            .collect(),
    };
    let outputs: Vec<Result<String>> = jobs
        .par_iter()
        .map(|(config, dir)| {
            let (baseline, ceeds) = run_experiment_paced(config, pace)?;
            let summary = write_outputs(config, &baseline, &ceeds, dir)?;
            Ok(format!("{}output: {}\n", summary.to_text(), dir.display()))
        })
        .collect();
    for (i, out) in outputs.into_iter().enumerate() {
        if i > 0 {
            println!();
        }
        print!("{}", out?);
    }
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run(args) => run(args),
        Command::Sweep(args) => {
            let config = args.common.resolve()?;
            let seeds = parse_seeds(&args.seeds)?;
            let rows = sweep(&config, &seeds)?;
            println!("waveform: {}", config.waveform);
            print!("{}", sweep_table(&rows));
            Ok(())
        }
        Command::Calibrate(args) => {
            let config = args.common.resolve()?;
            let (points, tf) = calibrate(&config)?;
            println!("{:>10} {:>12}", "duty", "steady_rpm");
            for (d, r) in &points {
                println!("{d:>10.2} {r:>12.3}");
            }
            println!("rpm = {:.6} * duty + {:.6}", tf.slope, tf.intercept);
            println!("duty = (rpm - {:.6}) / {:.6}", tf.intercept, tf.slope);
            Ok(())
        }
    }
}
