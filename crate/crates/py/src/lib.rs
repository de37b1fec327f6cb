use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use hipfrac::classifiers::{ClassifierKind, ClassifierSpec};
use hipfrac::datamodel::{self, FeatureSet, LoadPolicy, Stratum};
use hipfrac::eval::{self, EvalConfig, PcaMode};
use hipfrac::femodel::{self, FeConfig};
use hipfrac::stats::{self, Tail};
use hipfrac::synth::{self, CohortSpec};

fn err(e: hipfrac::Error) -> PyErr {
    if e.is_numerical() {
        PyRuntimeError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn to_py<'py>(py: Python<'py>, value: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn parse_tail(tail: &str) -> PyResult<Tail> {
    serde_json::from_value(serde_json::Value::String(tail.to_string()))
        .map_err(|_| PyValueError::new_err(format!("unknown tail: {tail}")))
}

fn parse_spec(spec_json: Option<&str>) -> PyResult<CohortSpec> {
    let spec = match spec_json {
        Some(text) => serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?,
        None => CohortSpec::table1_default(),
    };
    spec.validate().map_err(err)?;
    Ok(spec)
}

fn policy(drop_invalid: bool) -> LoadPolicy {
    if drop_invalid {
        LoadPolicy::DropInvalid
    } else {
        LoadPolicy::Strict
    }
}

fn parse_list<T: std::str::FromStr<Err = hipfrac::Error>>(items: Option<Vec<String>>) -> PyResult<Option<Vec<T>>> {
    items
        .map(|v| v.iter().map(|s| s.parse().map_err(err)).collect())
        .transpose()
}

/// A validated subject table.
#[pyclass(name = "Cohort", module = "hipfrac_py", from_py_object)]
#[derive(Clone)]
struct PyCohort {
    inner: datamodel::Cohort,
}

#[pymethods]
impl PyCohort {
    #[staticmethod]
    #[pyo3(signature = (path, drop_invalid = false))]
    fn load(path: &str, drop_invalid: bool) -> PyResult<Self> {
        let inner = datamodel::load_cohort(path, policy(drop_invalid)).map_err(err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (text, drop_invalid = false))]
    fn from_csv(text: &str, drop_invalid: bool) -> PyResult<Self> {
        let inner = datamodel::parse_cohort(text, policy(drop_invalid)).map_err(err)?;
        Ok(Self { inner })
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn case_count(&self) -> usize {
        self.inner.case_count()
    }

    fn labels(&self) -> Vec<u8> {
        self.inner.labels()
    }

    fn ids(&self) -> Vec<String> {
        self.inner.records.iter().map(|r| r.id.clone()).collect()
    }

    fn stratum(&self, name: &str) -> PyResult<Self> {
        let s: Stratum = name.parse().map_err(err)?;
        Ok(Self {
            inner: self.inner.stratum(s),
        })
    }

    /// Column of FE parameter `name` (e.g. "FStance").
    fn fe_column(&self, name: &str) -> PyResult<Vec<f64>> {
        let p: datamodel::FeParam = name.parse().map_err(err)?;
        Ok(self.inner.records.iter().map(|r| r.fe.get(p)).collect())
    }

    fn frax(&self) -> Vec<Option<f64>> {
        self.inner.records.iter().map(|r| r.frax_prob).collect()
    }

    fn __repr__(&self) -> String {
        format!("Cohort(n={}, cases={})", self.inner.len(), self.inner.case_count())
    }
}

/// Calibrated density on a regular grid.
#[pyclass(name = "VoxelGrid", module = "hipfrac_py", from_py_object)]
#[derive(Clone)]
struct PyVoxelGrid {
    inner: femodel::VoxelGrid,
}

#[pymethods]
impl PyVoxelGrid {
    #[new]
    fn new(dims: (usize, usize, usize), spacing: f64, rho_cha: Vec<f64>) -> PyResult<Self> {
        let inner = femodel::VoxelGrid::new(dims, spacing, rho_cha).map_err(err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (dims, spacing = 3.0, density = 0.5))]
    fn phantom(dims: (usize, usize, usize), spacing: f64, density: f64) -> PyResult<Self> {
        let inner = femodel::VoxelGrid::phantom(dims, spacing, density).map_err(err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Self {
            inner: femodel::VoxelGrid::load(path).map_err(err)?,
        })
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    #[getter]
    fn dims(&self) -> (usize, usize, usize) {
        (self.inner.nx, self.inner.ny, self.inner.nz)
    }

    #[getter]
    fn spacing(&self) -> f64 {
        self.inner.spacing
    }

    fn __repr__(&self) -> String {
        format!(
            "VoxelGrid({}x{}x{}, spacing={})",
            self.inner.nx, self.inner.ny, self.inner.nz, self.inner.spacing
        )
    }
}

/// A fitted feature projection and classifier.
#[pyclass(name = "Pipeline", module = "hipfrac_py", from_py_object)]
#[derive(Clone)]
struct PyPipeline {
    inner: eval::Pipeline,
}

#[pymethods]
impl PyPipeline {
    fn score(&self, cohort: &PyCohort) -> PyResult<Vec<f64>> {
        self.inner.score(&cohort.inner).map_err(err)
    }

    fn auc(&self, cohort: &PyCohort) -> PyResult<f64> {
        self.inner.auc(&cohort.inner).map_err(err)
    }

    #[getter]
    fn feature_set(&self) -> String {
        self.inner.feature_set.name()
    }

    #[getter]
    fn stratum(&self) -> String {
        self.inner.stratum.name().to_string()
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string_pretty(&self.inner).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(Self { inner })
    }
}

#[pyfunction]
#[pyo3(signature = (seed, group_size = None, spec_json = None))]
fn generate_cohort(py: Python<'_>, seed: u64, group_size: Option<usize>, spec_json: Option<&str>) -> PyResult<PyCohort> {
    let mut spec = parse_spec(spec_json)?;
    if let Some(n) = group_size {
        spec = spec.with_group_size(n);
    }
    let inner = py.detach(|| synth::generate_cohort(&spec, seed)).map_err(err)?;
    Ok(PyCohort { inner })
}

#[pyfunction]
#[pyo3(signature = (cohort, spec_json = None))]
fn calibration_check<'py>(py: Python<'py>, cohort: &PyCohort, spec_json: Option<&str>) -> PyResult<Bound<'py, PyAny>> {
    let spec = parse_spec(spec_json)?;
    let report = synth::calibration_check(&cohort.inner, &spec).map_err(err)?;
    to_py(py, &report)
}

#[pyfunction]
fn default_cohort_spec() -> &'static str {
    CohortSpec::default_json()
}

#[pyfunction]
fn ash_density(rho_cha: f64) -> PyResult<f64> {
    femodel::ash_density(rho_cha).map_err(err)
}

#[pyfunction]
fn derive_dxa_abmd(abmd_ct: f64) -> PyResult<f64> {
    datamodel::derive_dxa_abmd(abmd_ct).map_err(err)
}

#[pyfunction]
fn roc_auc(scores: Vec<f64>, labels: Vec<u8>) -> PyResult<f64> {
    stats::roc_auc(&scores, &labels).map(|(_, auc)| auc).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (scores_a, scores_b, labels, tail = "one_sided_greater"))]
fn delong_compare<'py>(
    py: Python<'py>,
    scores_a: Vec<f64>,
    scores_b: Vec<f64>,
    labels: Vec<u8>,
    tail: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let r = stats::delong_compare(&scores_a, &scores_b, &labels, parse_tail(tail)?).map_err(err)?;
    to_py(py, &r)
}

/// PCA of the nine FE strength and energy parameters.
#[pyfunction]
fn fit_fe9_pca<'py>(py: Python<'py>, cohort: &PyCohort) -> PyResult<Bound<'py, PyAny>> {
    let model = stats::pca::fit_fe9_pca(&cohort.inner).map_err(err)?;
    to_py(py, &model)
}

/// Runs the four load cases on `grid` and returns the twelve FE parameters.
#[pyfunction]
#[pyo3(signature = (grid, config_json = None))]
fn compute_fe_parameters<'py>(
    py: Python<'py>,
    grid: &PyVoxelGrid,
    config_json: Option<&str>,
) -> PyResult<Bound<'py, PyAny>> {
    let config: FeConfig = match config_json {
        Some(text) => serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?,
        None => FeConfig::default(),
    };
    config.material.validate().map_err(err)?;
    config.control.validate().map_err(err)?;
    let params = py
        .detach(|| femodel::compute_fe_parameters(&grid.inner, &config.material, &config.control))
        .map_err(err)?;
    to_py(py, &params)
}

#[pyfunction]
#[pyo3(signature = (cohort, feature_set = "PC1_ABMD_COV", classifier = "logistic", stratum = "all"))]
fn fit_pipeline(
    py: Python<'_>,
    cohort: &PyCohort,
    feature_set: &str,
    classifier: &str,
    stratum: &str,
) -> PyResult<PyPipeline> {
    let fs: FeatureSet = feature_set.parse().map_err(err)?;
    let kind: ClassifierKind = classifier.parse().map_err(err)?;
    let s: Stratum = stratum.parse().map_err(err)?;
    let spec = ClassifierSpec::new(kind);
    let inner = py
        .detach(|| eval::fit_pipeline(&cohort.inner, fs, s, &spec, None))
        .map_err(err)?;
    Ok(PyPipeline { inner })
}

#[pyfunction]
#[pyo3(signature = (cohort, scores, tail = "one_sided_greater"))]
fn compare_with_frax<'py>(
    py: Python<'py>,
    cohort: &PyCohort,
    scores: Vec<f64>,
    tail: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let r = eval::compare_with_frax(&cohort.inner, &scores, parse_tail(tail)?).map_err(err)?;
    to_py(py, &r)
}

/// Full evaluation protocol; returns the report as a JSON string.
#[pyfunction]
#[pyo3(signature = (
    cohort, seed = 0, strata = None, feature_sets = None, classifiers = None,
    repeats = 25, resamples = 1000, paper_mode = false, threads = None,
))]
#[allow(clippy::too_many_arguments)]
fn evaluate(
    py: Python<'_>,
    cohort: &PyCohort,
    seed: u64,
    strata: Option<Vec<String>>,
    feature_sets: Option<Vec<String>>,
    classifiers: Option<Vec<String>>,
    repeats: usize,
    resamples: usize,
    paper_mode: bool,
    threads: Option<usize>,
) -> PyResult<String> {
    let mut config = EvalConfig::new(seed);
    if let Some(s) = parse_list(strata)? {
        config.strata = s;
    }
    if let Some(f) = parse_list(feature_sets)? {
        config.feature_sets = f;
    }
    if let Some(c) = parse_list::<ClassifierKind>(classifiers)? {
        config.classifiers = c.into_iter().map(ClassifierSpec::new).collect();
    }
    config.cv.repeats = repeats;
    config.resample.resamples = resamples;
    if paper_mode {
        config.pca_mode = PcaMode::WholeSample;
    }
    let report = py
        .detach(|| eval::with_threads(threads, || eval::evaluate(&cohort.inner, &config)))
        .map_err(err)?
        .map_err(err)?;
    report.to_json().map_err(err)
}

/// Plain-text table for a JSON evaluation report.
#[pyfunction]
fn format_report(report_json: &str) -> PyResult<String> {
    Ok(eval::EvalReport::from_json(report_json).map_err(err)?.format_table())
}

#[pymodule]
fn hipfrac_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCohort>()?;
    m.add_class::<PyVoxelGrid>()?;
    m.add_class::<PyPipeline>()?;
    m.add_function(wrap_pyfunction!(generate_cohort, m)?)?;
    m.add_function(wrap_pyfunction!(calibration_check, m)?)?;
    m.add_function(wrap_pyfunction!(default_cohort_spec, m)?)?;
    m.add_function(wrap_pyfunction!(ash_density, m)?)?;
    m.add_function(wrap_pyfunction!(derive_dxa_abmd, m)?)?;
    m.add_function(wrap_pyfunction!(roc_auc, m)?)?;
    m.add_function(wrap_pyfunction!(delong_compare, m)?)?;
    m.add_function(wrap_pyfunction!(fit_fe9_pca, m)?)?;
    m.add_function(wrap_pyfunction!(compute_fe_parameters, m)?)?;
    m.add_function(wrap_pyfunction!(fit_pipeline, m)?)?;
    m.add_function(wrap_pyfunction!(compare_with_frax, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(format_report, m)?)?;
    Ok(())
}
