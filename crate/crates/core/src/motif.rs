//! Top-n motif discovery over a matrix profile and per-motif feature sets.

use std::collections::BTreeMap;

use crate::error::{CeedsError, Result};
use crate::matrix_profile::{
    default_exclusion_radius, distance_profile, MatrixProfile, TimeSeries, FLAT_EPSILON,
};

/// A recurring subsequence and where it recurs.
#[derive(Debug, Clone, PartialEq)]
pub struct Motif {
    /// Raw (un-normalized) window at `occurrences[0]`.
    pub representative: Vec<f64>,
    /// Strictly increasing start indices.
    pub occurrences: Vec<usize>,
    /// 1-based discovery rank.
    pub rank: usize,
    /// Profile distance of the seed pair this motif grew from.
    pub seed_distance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeatureSet {
    /// First occurrence, in samples from the start of the log.
    pub offset: usize,
    /// Most common gap between successive occurrences, in samples.
    pub modal_period: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisConfig {
    pub window_length: usize,
    pub motif_count: usize,
    /// Occurrences are gathered out to `radius_factor * seed distance`.
    pub radius_factor: f64,
    /// Motifs with smaller peak-to-peak amplitude (RPM) are discarded.
    pub min_amplitude: f64,
    /// Samples collected before analysis runs.
    pub analysis_cutoff: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            window_length: 35,
            motif_count: 5,
            radius_factor: 2.0,
            min_amplitude: 0.0,
            analysis_cutoff: 600,
        }
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window_length < 2 {
            return Err(CeedsError::invalid("window_length must be at least 2"));
        }
        if self.motif_count < 1 {
            return Err(CeedsError::invalid("motif_count must be at least 1"));
        }
        if !self.radius_factor.is_finite() || self.radius_factor <= 1.0 {
            return Err(CeedsError::invalid(
                "radius_factor must be a finite value > 1",
            ));
        }
        if !self.min_amplitude.is_finite() || self.min_amplitude < 0.0 {
            return Err(CeedsError::invalid("min_amplitude must be finite and >= 0"));
        }
        if self.analysis_cutoff <= self.window_length {
            return Err(CeedsError::invalid(
                "analysis_cutoff must exceed window_length",
            ));
        }
        Ok(())
    }
}

fn peak_to_peak(values: &[f64]) -> f64 {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if values.is_empty() {
        0.0
    } else {
        hi - lo
    }
}

/// Discovers up to `config.motif_count` motifs, best first.
///
/// Each round seeds on the smallest profile value whose pair lies outside
/// every earlier exclusion zone, gathers further occurrences from the seed's
/// distance profile within `radius_factor` times the seed distance, then
/// excludes `ceil(m/2)` samples around every occurrence.
pub fn top_motifs(
    series: &TimeSeries,
    profile: &MatrixProfile,
    config: &AnalysisConfig,
) -> Result<Vec<Motif>> {
    let m = config.window_length;
    if profile.window_length != m {
        return Err(CeedsError::invalid(format!(
            "profile window {} does not match config window {m}",
            profile.window_length
        )));
    }
    if series.len() < m || profile.len() != series.len() - m + 1 {
        return Err(CeedsError::invalid(
            "profile length does not match series and window length",
        ));
    }
    if config.motif_count == 0 {
        return Ok(Vec::new());
    }

    let radius = default_exclusion_radius(m);
    let floor = FLAT_EPSILON.sqrt() * (m as f64).sqrt();
    let count = profile.len();
    let x = series.values();
    let mut excluded = vec![false; count];
    let mut motifs = Vec::new();

    while motifs.len() < config.motif_count {
        let seed = (0..count)
            .filter(|&i| {
                let j = profile.neighbor_indices[i];
                j < count && !excluded[i] && !excluded[j] && profile.distances[i].is_finite()
            })
            .min_by(|&a, &b| profile.distances[a].total_cmp(&profile.distances[b]));
        let Some(i) = seed else { break };
        let j = profile.neighbor_indices[i];
        let seed_distance = profile.distances[i];

        let dp = distance_profile(series, &x[i..i + m])?;
        let threshold = (config.radius_factor * seed_distance).max(floor);
        let mut candidates: Vec<usize> = (0..count)
            .filter(|&k| !excluded[k] && dp[k] <= threshold)
            .collect();
        candidates.sort_by(|&a, &b| dp[a].total_cmp(&dp[b]).then(a.cmp(&b)));

        let mut occurrences = vec![i.min(j), i.max(j)];
        for k in candidates {
            if occurrences.iter().all(|&o| o.abs_diff(k) > radius) {
                occurrences.push(k);
            }
        }
        occurrences.sort_unstable();

        for &o in &occurrences {
            let lo = o.saturating_sub(radius);
            let hi = (o + radius).min(count - 1);
            excluded[lo..=hi].iter_mut().for_each(|e| *e = true);
        }

        let start = occurrences[0];
        let representative = x[start..start + m].to_vec();
        if peak_to_peak(&representative) < config.min_amplitude {
            continue;
        }
        motifs.push(Motif {
            representative,
            occurrences,
            rank: motifs.len() + 1,
            seed_distance,
        });
    }
    Ok(motifs)
}

/// Offset and modal period of a motif. Mode ties go to the smaller gap.
pub fn motif_features(motif: &Motif) -> Result<FeatureSet> {
    let occ = &motif.occurrences;
    if occ.len() < 2 {
        return Err(CeedsError::InsufficientOccurrences(occ.len()));
    }
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for w in occ.windows(2) {
        *counts.entry(w[1].abs_diff(w[0])).or_default() += 1;
    }
    // BTreeMap iterates ascending, so the first maximum is the smallest gap.
    let mut modal_period = 0;
    let mut best = 0;
    for (&gap, &n) in &counts {
        if n > best {
            best = n;
            modal_period = gap;
        }
    }
    if modal_period == 0 {
        return Err(CeedsError::invalid("motif occurrences are not distinct"));
    }
    Ok(FeatureSet {
        offset: *occ.iter().min().expect("non-empty"),
        modal_period,
    })
}
