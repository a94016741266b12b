//! Exact z-normalized matrix profile.
//!
//! Two routes compute the same self-join profile: [`brute_force_profile`]
//! compares explicitly z-normalized windows pairwise, and [`mpx`] streams
//! along the diagonals of the distance matrix, updating each cell's
//! covariance in O(1) from its upper-left neighbour.
//!
//! Flat windows (population stddev below [`FLAT_EPSILON`]) are normalized to
//! the zero vector. Two flat windows are therefore at distance 0 and a flat
//! window is at distance `sqrt(m)` from any non-flat one.

use crate::error::{CeedsError, Result};

/// Population stddev below which a window counts as flat.
pub const FLAT_EPSILON: f64 = 1e-8;

/// Default loop cadence in milliseconds.
pub const DEFAULT_SAMPLE_PERIOD_MS: u32 = 50;

/// Real-valued samples taken once per control loop iteration.
///
/// Index `i` corresponds to wall time `i * sample_period_ms`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: Vec<f64>,
    sample_period_ms: u32,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>, sample_period_ms: u32) -> Result<Self> {
        if sample_period_ms == 0 {
            return Err(CeedsError::invalid("sample period must be positive"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(CeedsError::invalid(format!(
                "non-finite value at index {i}"
            )));
        }
        Ok(TimeSeries {
            values,
            sample_period_ms,
        })
    }

    /// Series at the default 50 ms cadence.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        Self::new(values, DEFAULT_SAMPLE_PERIOD_MS)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sample_period_ms(&self) -> u32 {
        self.sample_period_ms
    }

    /// Wall time of sample `index` in milliseconds.
    pub fn time_ms(&self, index: usize) -> u64 {
        index as u64 * u64::from(self.sample_period_ms)
    }

    /// Appends a sample; rejects non-finite values.
    pub fn push(&mut self, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(CeedsError::invalid("non-finite sample"));
        }
        self.values.push(value);
        Ok(())
    }
}

/// Rolling mean and population stddev for every length-`m` window.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowStats {
    pub window_length: usize,
    pub means: Vec<f64>,
    pub stddevs: Vec<f64>,
    pub flat_flags: Vec<bool>,
}

impl WindowStats {
    pub fn len(&self) -> usize {
        self.means.len()
    }

    pub fn is_empty(&self) -> bool {
        self.means.is_empty()
    }
}

/// Nearest-neighbour distance and index for every subsequence.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixProfile {
    pub distances: Vec<f64>,
    pub neighbor_indices: Vec<usize>,
    pub window_length: usize,
    pub exclusion_radius: usize,
}

impl MatrixProfile {
    pub fn len(&self) -> usize {
        self.distances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.distances.is_empty()
    }
}

/// `ceil(m / 2)`, the exclusion radius used when none is given.
pub fn default_exclusion_radius(m: usize) -> usize {
    m.div_ceil(2)
}

fn check_window(len: usize, m: usize) -> Result<()> {
    if m < 2 {
        return Err(CeedsError::invalid(format!("window length {m} < 2")));
    }
    if len < m {
        return Err(CeedsError::invalid(format!(
            "series length {len} shorter than window {m}"
        )));
    }
    Ok(())
}

fn direct_moments(window: &[f64]) -> (f64, f64) {
    let m = window.len() as f64;
    let mean = window.iter().sum::<f64>() / m;
    let m2 = window.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>();
    (mean, m2)
}

/// Per-window mean and population stddev.
///
/// Each window is computed with a direct two-pass sum. A rolling update
/// drifts after large values, which can leave a flat plateau with a
/// stddev above [`FLAT_EPSILON`]; the O(n·m) cost is dominated by the
/// profile itself.
pub fn compute_window_stats(series: &TimeSeries, m: usize) -> Result<WindowStats> {
    let x = series.values();
    check_window(x.len(), m)?;
    let mf = m as f64;
    let (means, stddevs): (Vec<f64>, Vec<f64>) = x
        .windows(m)
        .map(|w| {
            let (mean, m2) = direct_moments(w);
            (mean, (m2 / mf).sqrt())
        })
        .unzip();
    let flat_flags = stddevs.iter().map(|&s| s < FLAT_EPSILON).collect();
    Ok(WindowStats {
        window_length: m,
        means,
        stddevs,
        flat_flags,
    })
}

fn znormalize(window: &[f64]) -> Vec<f64> {
    let (mean, m2) = direct_moments(window);
    let std = (m2 / window.len() as f64).sqrt();
    if std < FLAT_EPSILON {
        vec![0.0; window.len()]
    } else {
        window.iter().map(|v| (v - mean) / std).collect()
    }
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Z-normalized Euclidean distance between the windows starting at `i` and `j`.
pub fn subsequence_distance(series: &TimeSeries, i: usize, j: usize, m: usize) -> Result<f64> {
    let x = series.values();
    check_window(x.len(), m)?;
    let last = x.len() - m;
    if i > last || j > last {
        return Err(CeedsError::invalid(format!(
            "subsequence index out of range (i={i}, j={j}, last valid {last})"
        )));
    }
    if i == j {
        return Ok(0.0);
    }
    Ok(euclidean(
        &znormalize(&x[i..i + m]),
        &znormalize(&x[j..j + m]),
    ))
}

fn check_admissible(len: usize, m: usize, exclusion_radius: usize) -> Result<usize> {
    check_window(len, m)?;
    let count = len - m + 1;
    if count < 2 * exclusion_radius + 2 {
        return Err(CeedsError::invalid(format!(
            "{count} subsequences leave no admissible neighbour with exclusion radius {exclusion_radius}"
        )));
    }
    Ok(count)
}

#[inline]
fn offer(distances: &mut [f64], neighbors: &mut [usize], i: usize, j: usize, d: f64) {
    if d < distances[i] || (d == distances[i] && j < neighbors[i]) {
        distances[i] = d;
        neighbors[i] = j;
    }
}

/// Quadratic reference profile built from explicitly normalized windows.
pub fn brute_force_profile(
    series: &TimeSeries,
    m: usize,
    exclusion_radius: usize,
) -> Result<MatrixProfile> {
    let x = series.values();
    let count = check_admissible(x.len(), m, exclusion_radius)?;
    let normalized: Vec<Vec<f64>> = (0..count).map(|i| znormalize(&x[i..i + m])).collect();

    let mut distances = vec![f64::INFINITY; count];
    let mut neighbors = vec![usize::MAX; count];
    for i in 0..count {
        for j in 0..count {
            if i.abs_diff(j) <= exclusion_radius {
                continue;
            }
            let d = euclidean(&normalized[i], &normalized[j]);
            offer(&mut distances, &mut neighbors, i, j, d);
        }
    }
    Ok(MatrixProfile {
        distances,
        neighbor_indices: neighbors,
        window_length: m,
        exclusion_radius,
    })
}

/// Exact matrix profile by diagonal streaming (MPX).
pub fn mpx(series: &TimeSeries, m: usize, exclusion_radius: usize) -> Result<MatrixProfile> {
    let x = series.values();
    let count = check_admissible(x.len(), m, exclusion_radius)?;
    let stats = compute_window_stats(series, m)?;
    let mf = m as f64;
    let mu = &stats.means;
    let flat = &stats.flat_flags;

    // 1 / ||x_i - mu_i||
    let inv_norm: Vec<f64> = stats
        .stddevs
        .iter()
        .zip(flat)
        .map(|(&s, &f)| if f { 0.0 } else { 1.0 / (s * mf.sqrt()) })
        .collect();

    let mut df = vec![0.0; count];
    let mut dg = vec![0.0; count];
    for i in 1..count {
        df[i] = (x[i + m - 1] - x[i - 1]) / 2.0;
        dg[i] = (x[i + m - 1] - mu[i]) + (x[i - 1] - mu[i - 1]);
    }

    let mut distances = vec![f64::INFINITY; count];
    let mut neighbors = vec![usize::MAX; count];
    let flat_to_signal = mf.sqrt();

    for diag in (exclusion_radius + 1)..count {
        let mut cov: f64 = (0..m)
            .map(|k| (x[diag + k] - mu[diag]) * (x[k] - mu[0]))
            .sum();
        for row in 0..(count - diag) {
            let col = row + diag;
            if row > 0 {
                cov += df[row] * dg[col] + df[col] * dg[row];
            }
            let d = match (flat[row], flat[col]) {
                (true, true) => 0.0,
                (true, false) | (false, true) => flat_to_signal,
                (false, false) => {
                    let corr = (cov * inv_norm[row] * inv_norm[col]).clamp(-1.0, 1.0);
                    (2.0 * mf * (1.0 - corr)).max(0.0).sqrt()
                }
            };
            offer(&mut distances, &mut neighbors, row, col, d);
            offer(&mut distances, &mut neighbors, col, row, d);
        }
    }

    Ok(MatrixProfile {
        distances,
        neighbor_indices: neighbors,
        window_length: m,
        exclusion_radius,
    })
}

/// Distance from `query` to every window of `series` of the same length.
pub fn distance_profile(series: &TimeSeries, query: &[f64]) -> Result<Vec<f64>> {
    let m = query.len();
    if m > series.len() {
        return Err(CeedsError::invalid(format!(
            "query length {m} exceeds series length {}",
            series.len()
        )));
    }
    if query.iter().any(|v| !v.is_finite()) {
        return Err(CeedsError::invalid("query contains non-finite values"));
    }
    let stats = compute_window_stats(series, m)?;
    let q = znormalize(query);
    let query_flat = q.iter().all(|&v| v == 0.0);
    let x = series.values();
    let mf = m as f64;

    Ok((0..stats.len())
        .map(|j| match (query_flat, stats.flat_flags[j]) {
            (true, true) => 0.0,
            (true, false) | (false, true) => mf.sqrt(),
            (false, false) => {
                let dot: f64 = q
                    .iter()
                    .zip(&x[j..j + m])
                    .map(|(a, b)| a * (b - stats.means[j]))
                    .sum();
                let corr = (dot / (mf * stats.stddevs[j])).clamp(-1.0, 1.0);
                (2.0 * mf * (1.0 - corr)).max(0.0).sqrt()
            }
        })
        .collect())
}
