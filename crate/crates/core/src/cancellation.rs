//! Cancellation cycles: negated motifs padded out to one full period,
//! tiled across the logged error and ranked by how much error they remove.

use crate::error::{CeedsError, Result};
use crate::matrix_profile::TimeSeries;
use crate::motif::{FeatureSet, Motif};

/// One period of the counter-interference signal.
///
/// The first `motif_length` values are the negated motif, the remaining
/// `modal_period - motif_length` are zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct CancellationCycle {
    pub cycle_values: Vec<f64>,
    pub offset: usize,
    pub source_rank: usize,
    pub motif_length: usize,
}

impl CancellationCycle {
    pub fn modal_period(&self) -> usize {
        self.cycle_values.len()
    }

    /// Cycle value aligned to absolute sample `t`.
    pub fn value_at(&self, t: usize) -> f64 {
        let period = self.cycle_values.len() as i64;
        let phase = (t as i64 - self.offset as i64).rem_euclid(period);
        self.cycle_values[phase as usize]
    }
}

pub fn build_cycle(motif: &Motif, features: &FeatureSet) -> Result<CancellationCycle> {
    let motif_len = motif.representative.len();
    if features.modal_period < motif_len || motif_len == 0 {
        return Err(CeedsError::PeriodTooShort {
            period: features.modal_period,
            motif_len,
        });
    }
    let mut cycle_values: Vec<f64> = motif.representative.iter().map(|v| -v).collect();
    cycle_values.resize(features.modal_period, 0.0);
    Ok(CancellationCycle {
        cycle_values,
        offset: features.offset,
        source_rank: motif.rank,
        motif_length: motif_len,
    })
}

/// Periodic extension of the cycle over `[0, length)`, phased so that a
/// cycle starts at `offset`. Samples before the offset continue the same
/// period backwards.
pub fn tile_cancellation(cycle: &CancellationCycle, length: usize) -> Vec<f64> {
    (0..length).map(|t| cycle.value_at(t)).collect()
}

/// Sum of `|error + candidate|`: the error that would remain had the
/// candidate been applied.
pub fn retroactive_score(error_log: &TimeSeries, candidate: &[f64]) -> Result<f64> {
    if error_log.len() != candidate.len() {
        return Err(CeedsError::invalid(format!(
            "error log has {} samples, candidate has {}",
            error_log.len(),
            candidate.len()
        )));
    }
    Ok(error_log
        .values()
        .iter()
        .zip(candidate)
        .map(|(e, c)| (e + c).abs())
        .sum())
}

/// Retroactive score of each candidate's tiling, in input order.
pub fn score_candidates(error_log: &TimeSeries, candidates: &[CancellationCycle]) -> Vec<f64> {
    candidates
        .iter()
        .map(|c| {
            let tiled = tile_cancellation(c, error_log.len());
            retroactive_score(error_log, &tiled).expect("tiling matches log length")
        })
        .collect()
}

/// The candidate leaving the least retroactive error; ties go to the lower
/// source rank.
pub fn select_best(
    error_log: &TimeSeries,
    candidates: &[CancellationCycle],
) -> Result<CancellationCycle> {
    let scores = score_candidates(error_log, candidates);
    candidates
        .iter()
        .zip(&scores)
        .min_by(|(a, sa), (b, sb)| {
            sa.total_cmp(sb)
                .then_with(|| a.source_rank.cmp(&b.source_rank))
        })
        .map(|(c, _)| c.clone())
        .ok_or(CeedsError::NoCandidate)
}
