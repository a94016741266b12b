//! Python bindings: `import ceeds`.

use ceeds_core::harness::{self, render_csv, ExperimentConfig, ExperimentLog};
use ceeds_core::{
    matrix_profile, AnalysisConfig, CancellationCycle, CeedsError, FeatureSet, MatrixProfile,
    Motif, PidGains, PidState, TimeSeries, TransferFunction,
};
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

fn py_err(e: CeedsError) -> PyErr {
    match e {
        CeedsError::Io { .. } => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn series(values: Vec<f64>) -> PyResult<TimeSeries> {
    TimeSeries::from_values(values).map_err(py_err)
}

#[pyclass(name = "MatrixProfile", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
struct PyMatrixProfile {
    distances: Vec<f64>,
    neighbor_indices: Vec<usize>,
    window_length: usize,
    exclusion_radius: usize,
}

impl From<MatrixProfile> for PyMatrixProfile {
    fn from(p: MatrixProfile) -> Self {
        PyMatrixProfile {
            distances: p.distances,
            neighbor_indices: p.neighbor_indices,
            window_length: p.window_length,
            exclusion_radius: p.exclusion_radius,
        }
    }
}

#[pymethods]
impl PyMatrixProfile {
    fn __len__(&self) -> usize {
        self.distances.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "MatrixProfile(len={}, window_length={}, exclusion_radius={})",
            self.distances.len(),
            self.window_length,
            self.exclusion_radius
        )
    }
}

#[pyclass(name = "Motif", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
struct PyMotif {
    representative: Vec<f64>,
    occurrences: Vec<usize>,
    rank: usize,
    seed_distance: f64,
}

impl PyMotif {
    fn inner(&self) -> Motif {
        Motif {
            representative: self.representative.clone(),
            occurrences: self.occurrences.clone(),
            rank: self.rank,
            seed_distance: self.seed_distance,
        }
    }
}

#[pymethods]
impl PyMotif {
    #[new]
    #[pyo3(signature = (representative, occurrences, rank=1, seed_distance=0.0))]
    fn new(
        representative: Vec<f64>,
        occurrences: Vec<usize>,
        rank: usize,
        seed_distance: f64,
    ) -> Self {
        PyMotif {
            representative,
            occurrences,
            rank,
            seed_distance,
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "Motif(rank={}, length={}, occurrences={:?})",
            self.rank,
            self.representative.len(),
            self.occurrences
        )
    }
}

#[pyclass(name = "FeatureSet", frozen, get_all, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PyFeatureSet {
    offset: usize,
    modal_period: usize,
}

#[pymethods]
impl PyFeatureSet {
    #[new]
    fn new(offset: usize, modal_period: usize) -> Self {
        PyFeatureSet {
            offset,
            modal_period,
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "FeatureSet(offset={}, modal_period={})",
            self.offset, self.modal_period
        )
    }
}

#[pyclass(name = "CancellationCycle", frozen, from_py_object)]
#[derive(Clone)]
struct PyCycle(CancellationCycle);

#[pymethods]
impl PyCycle {
    #[new]
    #[pyo3(signature = (cycle_values, offset, source_rank=1, motif_length=None))]
    fn new(
        cycle_values: Vec<f64>,
        offset: usize,
        source_rank: usize,
        motif_length: Option<usize>,
    ) -> PyResult<Self> {
        if cycle_values.is_empty() {
            return Err(PyValueError::new_err("cycle_values must not be empty"));
        }
        let motif_length = motif_length.unwrap_or(cycle_values.len());
        Ok(PyCycle(CancellationCycle {
            cycle_values,
            offset,
            source_rank,
            motif_length,
        }))
    }

    #[getter]
    fn cycle_values(&self) -> Vec<f64> {
        self.0.cycle_values.clone()
    }

    #[getter]
    fn offset(&self) -> usize {
        self.0.offset
    }

    #[getter]
    fn source_rank(&self) -> usize {
        self.0.source_rank
    }

    #[getter]
    fn motif_length(&self) -> usize {
        self.0.motif_length
    }

    #[getter]
    fn modal_period(&self) -> usize {
        self.0.modal_period()
    }

    fn value_at(&self, t: usize) -> f64 {
        self.0.value_at(t)
    }

    fn __repr__(&self) -> String {
        format!(
            "CancellationCycle(modal_period={}, offset={}, source_rank={})",
            self.0.modal_period(),
            self.0.offset,
            self.0.source_rank
        )
    }
}

#[pyclass(name = "TransferFunction", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PyTransfer(TransferFunction);

#[pymethods]
impl PyTransfer {
    #[new]
    #[pyo3(signature = (slope, intercept, duty_max=255.0))]
    fn new(slope: f64, intercept: f64, duty_max: f64) -> PyResult<Self> {
        TransferFunction::new(slope, intercept, duty_max)
            .map(PyTransfer)
            .map_err(py_err)
    }

    #[getter]
    fn slope(&self) -> f64 {
        self.0.slope
    }

    #[getter]
    fn intercept(&self) -> f64 {
        self.0.intercept
    }

    #[getter]
    fn duty_max(&self) -> f64 {
        self.0.duty_max
    }

    fn forward(&self, duty: f64) -> f64 {
        self.0.forward(duty)
    }

    fn inverse(&self, rpm: f64) -> f64 {
        self.0.inverse(rpm)
    }

    fn __repr__(&self) -> String {
        format!(
            "TransferFunction(slope={}, intercept={}, duty_max={})",
            self.0.slope, self.0.intercept, self.0.duty_max
        )
    }
}

#[pyclass(name = "PidGains", frozen, get_all, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PyGains {
    kp: f64,
    ki: f64,
    kd: f64,
    integral_limit: f64,
}

#[pymethods]
impl PyGains {
    #[new]
    #[pyo3(signature = (kp, ki, kd, integral_limit=f64::INFINITY))]
    fn new(kp: f64, ki: f64, kd: f64, integral_limit: f64) -> Self {
        PyGains {
            kp,
            ki,
            kd,
            integral_limit,
        }
    }
}

#[pyclass(name = "PidState", frozen, get_all, skip_from_py_object)]
#[derive(Clone, Copy, Default)]
struct PyPidState {
    integral: f64,
    previous_error: f64,
    initialized: bool,
}

#[pymethods]
impl PyPidState {
    #[new]
    fn new() -> Self {
        Self::default()
    }

    fn __repr__(&self) -> String {
        format!(
            "PidState(integral={}, previous_error={}, initialized={})",
            self.integral,
            self.previous_error,
            if self.initialized { "True" } else { "False" }
        )
    }
}

#[pyclass(name = "ExperimentConfig", skip_from_py_object)]
#[derive(Clone)]
struct PyConfig(ExperimentConfig);

#[pymethods]
impl PyConfig {
    /// Defaults, overridden by `key = value` text and then by keyword values.
    #[new]
    #[pyo3(signature = (text=None, **overrides))]
    fn new(
        text: Option<&str>,
        overrides: Option<&Bound<'_, pyo3::types::PyDict>>,
    ) -> PyResult<Self> {
        let mut config = match text {
            Some(t) => ExperimentConfig::parse(t).map_err(py_err)?,
            None => ExperimentConfig::default(),
        };
        if let Some(kw) = overrides {
            for (k, v) in kw.iter() {
                let key: String = k.extract()?;
                let value = v.str()?.to_string();
                config.set(&key, &value).map_err(py_err)?;
            }
        }
        config.validate().map_err(py_err)?;
        Ok(PyConfig(config))
    }

    fn set(&mut self, key: &str, value: &Bound<'_, PyAny>) -> PyResult<()> {
        self.0.set(key, &value.str()?.to_string()).map_err(py_err)
    }

    fn get(&self, key: &str) -> PyResult<String> {
        self.0
            .to_pairs()
            .into_iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v)
            .ok_or_else(|| PyValueError::new_err(format!("unknown key {key:?}")))
    }

    fn to_text(&self) -> String {
        self.0.to_text()
    }

    fn __repr__(&self) -> String {
        format!(
            "ExperimentConfig(waveform={:?}, seed={})",
            self.0.waveform, self.0.seed
        )
    }
}

#[pyclass(name = "ExperimentLog", frozen, skip_from_py_object)]
struct PyLog(ExperimentLog);

#[pymethods]
impl PyLog {
    fn errors(&self) -> Vec<f64> {
        self.0.errors()
    }

    fn column(&self, name: &str) -> PyResult<Vec<f64>> {
        let pick: fn(&harness::SampleRecord) -> f64 = match name {
            "setpoint_rpm" => |r| r.setpoint_rpm,
            "measured_rpm" => |r| r.measured_rpm,
            "error" => |r| r.error,
            "duty" => |r| r.duty,
            "interference_rpm" => |r| r.interference_rpm,
            "cancellation_rpm" => |r| r.cancellation_rpm,
            other => return Err(PyValueError::new_err(format!("no real column {other:?}"))),
        };
        Ok(self.0.records.iter().map(pick).collect())
    }

    fn phases(&self) -> Vec<&'static str> {
        self.0.records.iter().map(|r| r.phase.as_str()).collect()
    }

    #[getter]
    fn header(&self) -> Vec<(String, String)> {
        self.0.header.clone()
    }

    #[getter]
    fn chosen(&self) -> Option<PyCycle> {
        self.0.chosen.clone().map(PyCycle)
    }

    fn to_csv(&self) -> String {
        render_csv(&self.0)
    }

    fn __len__(&self) -> usize {
        self.0.records.len()
    }
}

#[pyfunction]
#[pyo3(signature = (values, m, exclusion_radius=None))]
fn mpx(values: Vec<f64>, m: usize, exclusion_radius: Option<usize>) -> PyResult<PyMatrixProfile> {
    let r = exclusion_radius.unwrap_or_else(|| matrix_profile::default_exclusion_radius(m));
    ceeds_core::mpx(&series(values)?, m, r)
        .map(Into::into)
        .map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (values, m, exclusion_radius=None))]
fn brute_force_profile(
    values: Vec<f64>,
    m: usize,
    exclusion_radius: Option<usize>,
) -> PyResult<PyMatrixProfile> {
    let r = exclusion_radius.unwrap_or_else(|| matrix_profile::default_exclusion_radius(m));
    ceeds_core::brute_force_profile(&series(values)?, m, r)
        .map(Into::into)
        .map_err(py_err)
}

#[pyfunction]
fn subsequence_distance(values: Vec<f64>, i: usize, j: usize, m: usize) -> PyResult<f64> {
    ceeds_core::subsequence_distance(&series(values)?, i, j, m).map_err(py_err)
}

#[pyfunction]
fn distance_profile(values: Vec<f64>, query: Vec<f64>) -> PyResult<Vec<f64>> {
    ceeds_core::distance_profile(&series(values)?, &query).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (values, window_length=35, motif_count=5, radius_factor=2.0, min_amplitude=0.0))]
fn top_motifs(
    values: Vec<f64>,
    window_length: usize,
    motif_count: usize,
    radius_factor: f64,
    min_amplitude: f64,
) -> PyResult<Vec<PyMotif>> {
    let config = AnalysisConfig {
        window_length,
        motif_count,
        radius_factor,
        min_amplitude,
        analysis_cutoff: values.len(),
    };
    let s = series(values)?;
    let profile = ceeds_core::mpx(
        &s,
        window_length,
        matrix_profile::default_exclusion_radius(window_length),
    )
    .map_err(py_err)?;
    let motifs = ceeds_core::top_motifs(&s, &profile, &config).map_err(py_err)?;
    Ok(motifs
        .into_iter()
        .map(|m| PyMotif {
            representative: m.representative,
            occurrences: m.occurrences,
            rank: m.rank,
            seed_distance: m.seed_distance,
        })
        .collect())
}

#[pyfunction]
fn motif_features(motif: &PyMotif) -> PyResult<PyFeatureSet> {
    let f = ceeds_core::motif_features(&motif.inner()).map_err(py_err)?;
    Ok(PyFeatureSet {
        offset: f.offset,
        modal_period: f.modal_period,
    })
}

#[pyfunction]
fn build_cycle(motif: &PyMotif, features: &PyFeatureSet) -> PyResult<PyCycle> {
    let f = FeatureSet {
        offset: features.offset,
        modal_period: features.modal_period,
    };
    ceeds_core::build_cycle(&motif.inner(), &f)
        .map(PyCycle)
        .map_err(py_err)
}

#[pyfunction]
fn tile_cancellation(cycle: &PyCycle, length: usize) -> Vec<f64> {
    ceeds_core::tile_cancellation(&cycle.0, length)
}

#[pyfunction]
fn retroactive_score(errors: Vec<f64>, candidate: Vec<f64>) -> PyResult<f64> {
    ceeds_core::retroactive_score(&series(errors)?, &candidate).map_err(py_err)
}

#[pyfunction]
fn select_best(errors: Vec<f64>, candidates: Vec<PyCycle>) -> PyResult<PyCycle> {
    let cycles: Vec<CancellationCycle> = candidates.into_iter().map(|c| c.0).collect();
    ceeds_core::select_best(&series(errors)?, &cycles)
        .map(PyCycle)
        .map_err(py_err)
}

#[pyfunction]
fn parse_waveform(spec: &str) -> PyResult<Vec<f64>> {
    ceeds_core::parse_waveform(spec)
        .map(|w| w.samples().to_vec())
        .map_err(py_err)
}

#[pyfunction]
fn fit_transfer(points: Vec<(f64, f64)>) -> PyResult<PyTransfer> {
    ceeds_core::fit_transfer(&points)
        .map(PyTransfer)
        .map_err(py_err)
}

#[pyfunction]
fn pid_step(
    state: &PyPidState,
    gains: &PyGains,
    error: f64,
    dt: f64,
) -> PyResult<(f64, PyPidState)> {
    let s = PidState {
        integral: state.integral,
        previous_error: state.previous_error,
        initialized: state.initialized,
    };
    let g = PidGains {
        kp: gains.kp,
        ki: gains.ki,
        kd: gains.kd,
        integral_limit: gains.integral_limit,
    };
    let (out, next) = ceeds_core::pid_step(&s, &g, error, dt).map_err(py_err)?;
    Ok((
        out,
        PyPidState {
            integral: next.integral,
            previous_error: next.previous_error,
            initialized: next.initialized,
        },
    ))
}

/// Returns `(baseline, ceeds)` logs; releases the GIL while simulating.
#[pyfunction]
#[pyo3(signature = (config=None))]
fn run_experiment(py: Python<'_>, config: Option<&PyConfig>) -> PyResult<(PyLog, PyLog)> {
    let config = config.map_or_else(ExperimentConfig::default, |c| c.0.clone());
    let (b, c) = py
        .detach(|| harness::run_experiment(&config))
        .map_err(py_err)?;
    Ok((PyLog(b), PyLog(c)))
}

#[pyfunction]
fn error_reduction(baseline: &PyLog, ceeds: &PyLog, from_sample: usize) -> PyResult<f64> {
    harness::error_reduction(&baseline.0, &ceeds.0, from_sample).map_err(py_err)
}

#[pymodule]
fn ceeds(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMatrixProfile>()?;
    m.add_class::<PyMotif>()?;
    m.add_class::<PyFeatureSet>()?;
    m.add_class::<PyCycle>()?;
    m.add_class::<PyTransfer>()?;
    m.add_class::<PyGains>()?;
    m.add_class::<PyPidState>()?;
    m.add_class::<PyConfig>()?;
    m.add_class::<PyLog>()?;
    m.add_function(wrap_pyfunction!(mpx, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force_profile, m)?)?;
    m.add_function(wrap_pyfunction!(subsequence_distance, m)?)?;
    m.add_function(wrap_pyfunction!(distance_profile, m)?)?;
    m.add_function(wrap_pyfunction!(top_motifs, m)?)?;
    m.add_function(wrap_pyfunction!(motif_features, m)?)?;
    m.add_function(wrap_pyfunction!(build_cycle, m)?)?;
    m.add_function(wrap_pyfunction!(tile_cancellation, m)?)?;
    m.add_function(wrap_pyfunction!(retroactive_score, m)?)?;
    m.add_function(wrap_pyfunction!(select_best, m)?)?;
    m.add_function(wrap_pyfunction!(parse_waveform, m)?)?;
    m.add_function(wrap_pyfunction!(fit_transfer, m)?)?;
    m.add_function(wrap_pyfunction!(pid_step, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(error_reduction, m)?)?;
    m.add("NOISE_GENERATOR", ceeds_core::plant::NOISE_GENERATOR)?;
    Ok(())
}
