//! Cyclical error detection and cancellation for a PID + feedforward loop.
//!
//! The controller logs its tracking error for a fixed number of samples,
//! computes the exact matrix profile of that log, extracts the top motifs
//! with their offset and modal period, and turns the best one into a
//! periodic counter-signal that is added to the PIDF output from then on.
//!
//! Modules, bottom-up:
//!
//! * [`matrix_profile`]: window statistics, z-normalized distances, the MPX
//!   profile and its brute-force reference.
//! * [`motif`]: top-n motif discovery and feature sets.
//! * [`cancellation`]: cycle construction, tiling and retroactive ranking.
//! * [`control`]: PID, transfer function fitting and the phased controller.
//! * [`plant`]: simulated motor and interference waveforms.
//! * [`harness`]: paired experiments, metrics, CSV logs and SVG plots.

pub mod cancellation;
pub mod control;
pub mod error;
pub mod harness;
pub mod matrix_profile;
pub mod motif;
pub mod plant;

pub use cancellation::{
    build_cycle, retroactive_score, select_best, tile_cancellation, CancellationCycle,
};
pub use control::{
    fit_transfer, pid_step, run_analysis, AnalysisOutcome, CeedsController, Phase, PidGains,
    PidState, StepReport, TransferFunction,
};
pub use error::{CeedsError, Result};
pub use matrix_profile::{
    brute_force_profile, compute_window_stats, distance_profile, mpx, subsequence_distance,
    MatrixProfile, TimeSeries, WindowStats,
};
pub use motif::{motif_features, top_motifs, AnalysisConfig, FeatureSet, Motif};
pub use plant::{parse_waveform, plant_step, waveform_sample, PlantParams, PlantState, Waveform};
