//! Python bindings: `import pytrunctail`.

use std::fs::File;
use std::sync::Arc;

use pyo3::create_exception;
use pyo3::exceptions::{PyArithmeticError, PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use trunctail::io::{read_sample_csv, write_sample_csv};
use trunctail::limit_process::PathGrid;
use trunctail::{self as core, Error, EstimateOptions, Variant};

create_exception!(pytrunctail, ModelViolation, PyValueError);
create_exception!(pytrunctail, DegenerateTail, PyArithmeticError);

fn to_py(err: Error) -> PyErr {
    let msg = err.to_string();
    match err {
        Error::ModelViolation(_) => ModelViolation::new_err(msg),
        Error::DegenerateTail(_) | Error::EmptySample { .. } => DegenerateTail::new_err(msg),
        Error::Numeric(_) => PyArithmeticError::new_err(msg),
        Error::Io(_) => PyIOError::new_err(msg),
        _ => PyValueError::new_err(msg),
    }
}

fn variant(name: &str) -> PyResult<Variant> {
    name.parse().map_err(to_py)
}

/// One-dimensional heavy-tailed law, e.g. `HeavyTail("burr:0.25:0.6")`.
#[pyclass(frozen)]
#[derive(Clone)]
struct HeavyTail(core::HeavyTailModel);

#[pymethods]
impl HeavyTail {
    #[new]
    fn new(spec: &str) -> PyResult<Self> {
        spec.parse().map(Self).map_err(to_py)
    }

    #[staticmethod]
    fn burr(delta: f64, tail_index: f64) -> PyResult<Self> {
        core::HeavyTailModel::burr(delta, tail_index).map(Self).map_err(to_py)
    }

    #[staticmethod]
    fn pareto(tail_index: f64) -> PyResult<Self> {
        core::HeavyTailModel::pareto(tail_index).map(Self).map_err(to_py)
    }

    #[staticmethod]
    fn frechet(tail_index: f64) -> PyResult<Self> {
        core::HeavyTailModel::frechet(tail_index).map(Self).map_err(to_py)
    }

    #[getter]
    fn tail_index(&self) -> f64 {
        self.0.tail_index()
    }

    #[getter]
    fn second_order_tau(&self) -> f64 {
        self.0.second_order_tau()
    }

    fn survival(&self, x: f64) -> PyResult<f64> {
        self.0.survival(x).map_err(to_py)
    }

    fn cdf(&self, x: f64) -> PyResult<f64> {
        self.0.df(x).map_err(to_py)
    }

    fn quantile(&self, u: f64) -> PyResult<f64> {
        self.0.quantile(u).map_err(to_py)
    }

    fn sample(&self, count: usize, seed: u64) -> PyResult<Vec<f64>> {
        self.0.sample(count, seed).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("HeavyTail('{}')", self.0)
    }
}

/// Observed pairs `(x, y)` with `x <= y`.
#[pyclass(frozen)]
#[derive(Clone)]
struct Sample(core::TruncatedSample);

#[pymethods]
impl Sample {
    #[new]
    fn new(x: Vec<f64>, y: Vec<f64>) -> PyResult<Self> {
        if x.len() != y.len() {
            return Err(PyValueError::new_err(format!("x has {} values, y has {}", x.len(), y.len())));
        }
        core::TruncatedSample::new(x.into_iter().zip(y).collect()).map(Self).map_err(to_py)
    }

    /// All `y` infinite: no truncation.
    #[staticmethod]
    fn complete(x: Vec<f64>) -> PyResult<Self> {
        core::TruncatedSample::complete(&x).map(Self).map_err(to_py)
    }

    #[staticmethod]
    fn read_csv(path: &str) -> PyResult<Self> {
        let file = File::open(path).map_err(|e| PyIOError::new_err(format!("{path}: {e}")))?;
        read_sample_csv(file).map(Self).map_err(to_py)
    }

    fn write_csv(&self, path: &str) -> PyResult<()> {
        let file = File::create(path).map_err(|e| PyIOError::new_err(format!("{path}: {e}")))?;
        write_sample_csv(&self.0, file).map_err(to_py)
    }

    #[getter]
    fn x(&self) -> Vec<f64> {
        self.0.xs()
    }

    #[getter]
    fn y(&self) -> Vec<f64> {
        self.0.ys()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!("Sample(n={})", self.0.len())
    }
}

/// Truncated law X and truncating law Y, independent.
#[pyclass(frozen)]
struct TruncationModel(core::TruncationModel);

#[pymethods]
impl TruncationModel {
    #[new]
    fn new(truncated: &HeavyTail, truncation: &HeavyTail) -> PyResult<Self> {
        core::TruncationModel::new(truncated.0.clone(), truncation.0.clone()).map(Self).map_err(to_py)
    }

    #[staticmethod]
    fn burr_pair(delta: f64, gamma1: f64, gamma2: f64) -> PyResult<Self> {
        core::TruncationModel::burr_pair(delta, gamma1, gamma2).map(Self).map_err(to_py)
    }

    #[getter]
    fn gamma1(&self) -> f64 {
        self.0.gamma1()
    }

    #[getter]
    fn gamma2(&self) -> f64 {
        self.0.gamma2()
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.0.gamma()
    }

    /// P(X <= Y).
    #[getter]
    fn p(&self) -> f64 {
        self.0.truncation_probability()
    }

    #[getter]
    fn warnings(&self) -> Vec<String> {
        self.0.warnings().to_vec()
    }

    /// Draws `n` untruncated pairs and keeps those with `x <= y`.
    fn sample(&self, n: usize, seed: u64) -> PyResult<Sample> {
        self.0.sample_truncated(n, seed).map(Sample).map_err(to_py)
    }
}

#[pyclass(frozen)]
struct ProductLimit(core::ProductLimitFit);

#[pymethods]
impl ProductLimit {
    #[new]
    #[pyo3(signature = (sample, variant = "woodroofe"))]
    fn new(sample: &Sample, variant: &str) -> PyResult<Self> {
        Ok(Self(core::ProductLimitFit::fit(&sample.0, self::variant(variant)?)))
    }

    fn cdf(&self, x: f64) -> f64 {
        self.0.df(x)
    }

    fn survival(&self, x: f64) -> f64 {
        self.0.survival(x)
    }

    fn cumulative_hazard(&self, x: f64) -> f64 {
        self.0.cumulative_hazard(x)
    }

    /// Sorted `x`, `C_n` and the distribution function at each atom.
    fn atoms(&self) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let n = self.0.n();
        let xs = self.0.sorted_x().to_vec();
        let c = (0..n).map(|j| self.0.c_n_at(j)).collect();
        let df = (0..n).map(|j| self.0.df_at(j)).collect();
        (xs, c, df)
    }

    /// `gamma1_hat` for k = 1..=k_max.
    fn gamma1_path(&self, k_max: usize) -> PyResult<Vec<f64>> {
        core::tail_index::gamma1_path(&self.0, k_max).map_err(to_py)
    }
}

#[pyclass(frozen, get_all)]
struct Estimate {
    gamma1_hat: f64,
    k: usize,
    variant: String,
    gamma2_hat: Option<f64>,
    k2: Option<usize>,
    sigma2_hat: Option<f64>,
    /// `(level, lower, upper)`.
    ci: Option<(f64, f64, f64)>,
    n: usize,
    warnings: Vec<String>,
    model_violation: bool,
    json: String,
}

#[pymethods]
impl Estimate {
    fn __repr__(&self) -> String {
        format!("Estimate(gamma1_hat={}, k={}, n={})", self.gamma1_hat, self.k, self.n)
    }
}

impl From<core::TailIndexEstimate> for Estimate {
    fn from(e: core::TailIndexEstimate) -> Self {
        Self {
            json: serde_json::to_string(&e).expect("serializable"),
            model_violation: e.model_violation(),
            gamma1_hat: e.gamma1_hat,
            k: e.k,
            variant: e.variant.to_string(),
            gamma2_hat: e.gamma2_hat,
            k2: e.k2,
            sigma2_hat: e.sigma2_hat,
            ci: e.ci.map(|c| (c.level, c.lower, c.upper)),
            n: e.n,
            warnings: e.warnings,
        }
    }
}

/// Tail index of X from a truncated sample; `k` is selected when omitted.
#[pyfunction]
#[pyo3(signature = (sample, variant = "woodroofe", k = None, k2 = None, theta = 0.3, level = 0.95))]
fn estimate(
    sample: &Sample,
    variant: &str,
    k: Option<usize>,
    k2: Option<usize>,
    theta: f64,
    level: f64,
) -> PyResult<Estimate> {
    let opts = EstimateOptions { variant: self::variant(variant)?, k, k2, theta, level };
    core::estimate(&sample.0, &opts).map(Estimate::from).map_err(to_py)
}

#[pyfunction]
fn hill(values: Vec<f64>, k: usize) -> PyResult<f64> {
    core::hill(&values, k).map_err(to_py)
}

#[pyfunction]
fn asymptotic_variance(gamma1: f64, gamma2: f64) -> PyResult<f64> {
    core::asymptotic_variance(gamma1, gamma2).map_err(to_py)
}

#[pyfunction]
fn gamma2_for_target_p(gamma1: f64, p: f64) -> PyResult<f64> {
    core::gamma2_for_target_p(gamma1, p).map_err(to_py)
}

/// Knots and values of a Brownian path on `[0, 1]` with `m` uniform steps.
#[pyfunction]
fn simulate_wiener(m: usize, seed: u64) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let w = core::simulate_wiener(m, seed).map_err(to_py)?;
    Ok((w.knots().to_vec(), w.values().to_vec()))
}

/// Limiting random variable evaluated on one simulated path.
#[pyfunction]
fn limiting_rv(gamma1: f64, gamma2: f64, m: usize, seed: u64) -> PyResult<f64> {
    let w = core::simulate_wiener(m, seed).map_err(to_py)?;
    core::limiting_rv(&w, gamma1, gamma2).map_err(to_py)
}

/// Gamma(x; W) for several `x` on one simulated path.
#[pyfunction]
fn gamma_process(xs: Vec<f64>, gamma1: f64, gamma2: f64, m: usize, seed: u64) -> PyResult<Vec<f64>> {
    let grid: Arc<PathGrid> = PathGrid::new(m, trunctail::limit_process::DEFAULT_HEAD_LEVELS).map_err(to_py)?;
    let w = core::WienerPath::simulate(&grid, seed);
    xs.into_iter().map(|x| core::gamma_process(x, &w, gamma1, gamma2).map_err(to_py)).collect()
}

/// Exact second moments of the three Gaussian components at `rho`:
/// `(d1d1, d2d2, d3d3, d1d2, d1d3, d2d3)`.
#[pyfunction]
fn delta_moments(rho: f64) -> PyResult<(f64, f64, f64, f64, f64, f64)> {
    let a = core::delta_moments(rho).map_err(to_py)?.as_array();
    Ok((a[0], a[1], a[2], a[3], a[4], a[5]))
}

#[pyfunction]
#[pyo3(signature = (gamma1, gamma2, n_paths, m, seed))]
fn mc_variance<'py>(
    py: Python<'py>,
    gamma1: f64,
    gamma2: f64,
    n_paths: usize,
    m: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let s = py.allow_threads(|| core::mc_variance(gamma1, gamma2, n_paths, m, seed)).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("mean", s.mean)?;
    d.set_item("variance", s.variance)?;
    d.set_item("std_error", s.std_error)?;
    d.set_item("mean_std_error", s.mean_std_error)?;
    d.set_item("closed_form", core::asymptotic_variance(gamma1, gamma2).map_err(to_py)?)?;
    d.set_item("n_paths", s.n_paths)?;
    d.set_item("m", s.m)?;
    Ok(d)
}

/// Runs a study from its JSON configuration; one dict per (cell, N).
#[pyfunction]
#[pyo3(signature = (config_json, threads = None))]
fn run_study<'py>(py: Python<'py>, config_json: &str, threads: Option<usize>) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let config: core::StudyConfig =
        serde_json::from_str(config_json).map_err(|e| PyValueError::new_err(format!("config: {e}")))?;
    let report = py
        .allow_threads(|| match threads {
            Some(t) => core::montecarlo::run_study_with_threads(&config, t),
            None => core::run_study(&config),
        })
        .map_err(to_py)?;
    report
        .rows
        .iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("p", r.p)?;
            d.set_item("gamma1", r.gamma1)?;
            d.set_item("delta", r.delta)?;
            d.set_item("N", r.big_n)?;
            d.set_item("mean_n", r.mean_n)?;
            d.set_item("mean_k_star", r.mean_k_star)?;
            d.set_item("abs_bias", r.abs_bias)?;
            d.set_item("rmse", r.rmse)?;
            d.set_item("completed", r.completed)?;
            d.set_item("replicates", r.replicates)?;
            Ok(d)
        })
        .collect()
}

#[pymodule]
fn pytrunctail(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("ModelViolation", m.py().get_type::<ModelViolation>())?;
    m.add("DegenerateTail", m.py().get_type::<DegenerateTail>())?;
    m.add_class::<HeavyTail>()?;
    m.add_class::<Sample>()?;
    m.add_class::<TruncationModel>()?;
    m.add_class::<ProductLimit>()?;
    m.add_class::<Estimate>()?;
    m.add_function(wrap_pyfunction!(estimate, m)?)?;
    m.add_function(wrap_pyfunction!(hill, m)?)?;
    m.add_function(wrap_pyfunction!(asymptotic_variance, m)?)?;
    m.add_function(wrap_pyfunction!(gamma2_for_target_p, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_wiener, m)?)?;
    m.add_function(wrap_pyfunction!(limiting_rv, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_process, m)?)?;
    m.add_function(wrap_pyfunction!(delta_moments, m)?)?;
    m.add_function(wrap_pyfunction!(mc_variance, m)?)?;
    m.add_function(wrap_pyfunction!(run_study, m)?)?;
    Ok(())
}
