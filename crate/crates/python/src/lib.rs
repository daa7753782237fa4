//! Python module `sphereforge`: designs, mixture instances and the SQ
//! harness.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::Serialize;
use sphereforge::design::{self, PerturbConfig, WeightOutcome};
use sphereforge::hermite;
use sphereforge::mixture::{self, SampleBatch};
use sphereforge::sq::{self, OracleMode, Source, StatOracleConfig};

fn value_error(e: sphereforge::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Serializable value to plain Python objects via `json.loads`.
fn to_python<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn batch_tuple(batch: SampleBatch) -> (Vec<Vec<f64>>, Vec<i8>) {
    let n = batch.n.max(1);
    (batch.xs.chunks(n).map(<[f64]>::to_vec).collect(), batch.ys)
}

/// Unit vectors with nonnegative weights summing to one.
#[pyclass(name = "WeightedDesign", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyDesign(sphereforge::WeightedDesign);

#[pymethods]
impl PyDesign {
    #[new]
    #[pyo3(signature = (points, weights = None))]
    fn new(points: Vec<Vec<f64>>, weights: Option<Vec<f64>>) -> PyResult<Self> {
        let d = match weights {
            Some(w) => sphereforge::WeightedDesign::new(points, w),
            None => sphereforge::WeightedDesign::uniform(points),
        };
        d.map(PyDesign).map_err(value_error)
    }

    /// `k` equally spaced unit vectors in the plane, uniform weights.
    #[staticmethod]
    fn circle(k: usize) -> PyResult<Self> {
        design::evenly_spaced_circle(k).map(PyDesign).map_err(value_error)
    }

    #[getter]
    fn points(&self) -> Vec<Vec<f64>> {
        self.0.points().to_vec()
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.0.weights().to_vec()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    /// Per-degree sphere residuals of the odd degrees below `k`.
    fn residuals(&self, k: u32) -> PyResult<Vec<(u32, f64)>> {
        design::verify_weighted_design(&self.0, k).map(|r| r.per_degree).map_err(value_error)
    }

    /// Per-degree Hermite residuals of the induced label function.
    fn gaussian_residuals(&self, k: u32) -> Vec<(u32, f64)> {
        hermite::per_degree_gaussian_residual(&self.0, k)
    }

    fn min_separation(&self) -> PyResult<f64> {
        sphereforge::min_separation(self.0.points()).map_err(value_error)
    }

    fn __repr__(&self) -> String {
        format!("WeightedDesign(r={}, d={})", self.0.len(), self.0.dim())
    }
}

/// Labeled Gaussian mixture of halfspaces embedded in `R^n`.
#[pyclass(name = "MixtureInstance", frozen)]
struct PyInstance(sphereforge::MixtureInstance);

#[pymethods]
impl PyInstance {
    #[new]
    fn new(design: &PyDesign, n: usize, seed: u64) -> PyResult<Self> {
        sphereforge::MixtureInstance::build(&design.0, n, seed).map(PyInstance).map_err(value_error)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n
    }

    #[getter]
    fn projection(&self) -> Vec<Vec<f64>> {
        self.0.projection.clone()
    }

    /// `(xs, ys)` with `xs` a list of rows and `ys` in `{-1, +1}`.
    fn sample(&self, count: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<i8>) {
        batch_tuple(self.0.sample(count, seed))
    }

    fn conditional_mean(&self, x: Vec<f64>) -> PyResult<f64> {
        if x.len() != self.0.n {
            return Err(PyValueError::new_err(format!("expected {} coordinates", self.0.n)));
        }
        Ok(self.0.conditional_mean(&x))
    }

    /// Monte-Carlo estimate and standard error of the distance to the null.
    fn tv_estimate(&self, count: usize, seed: u64) -> PyResult<(f64, f64)> {
        self.0.tv_lower_estimate(count, seed).map_err(value_error)
    }
}

#[pyfunction]
fn null_sample(n: usize, count: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<i8>) {
    batch_tuple(mixture::null_sample(n, count, seed))
}

/// Nonnegative weights matching odd moments below `k`, or a certificate.
///
/// Returns `(design, None)` when feasible and `(None, certificate)` with
/// the certificate as a dict otherwise.
#[pyfunction]
fn solve_weights<'py>(
    py: Python<'py>,
    points: Vec<Vec<f64>>,
    k: u32,
) -> PyResult<(Option<PyDesign>, Option<Bound<'py, PyAny>>)> {
    match design::solve_weights(&points, k).map_err(value_error)? {
        WeightOutcome::Feasible { design, .. } => Ok((Some(PyDesign(design)), None)),
        WeightOutcome::Infeasible { certificate } => Ok((None, Some(to_python(py, &certificate)?))),
    }
}

/// Moves `points` to an equal-weight odd `t`-design; returns the design and
/// the solver report.
#[pyfunction]
#[pyo3(signature = (points, t, tolerance = 1e-10, max_iterations = 10_000))]
fn solve_uniform_design<'py>(
    py: Python<'py>,
    points: Vec<Vec<f64>>,
    t: u32,
    tolerance: f64,
    max_iterations: usize,
) -> PyResult<(PyDesign, Bound<'py, PyAny>)> {
    let config = PerturbConfig { tolerance, max_iterations, ..PerturbConfig::default() };
    let (z, report) = py.detach(|| design::solve_uniform_design(&points, t, &config)).map_err(value_error)?;
    let d = sphereforge::WeightedDesign::uniform(z).map_err(value_error)?;
    Ok((PyDesign(d), to_python(py, &report)?))
}

/// Seeded uniform points on the unit sphere.
#[pyfunction]
fn sphere_points(seed: u64, r: usize, d: usize) -> Vec<Vec<f64>> {
    sphereforge::rng::sphere_points(seed, sphereforge::rng::Purpose::InitialPoints, r, d)
}

#[pyfunction]
fn hoeffding_tolerance(budget: u64) -> f64 {
    sq::hoeffding_tolerance(budget)
}

/// Runs every Hermite query of degree ≤ `degree` against `instance` (or
/// the null in `R^n` when `instance` is None) and returns the report.
#[pyfunction]
#[pyo3(signature = (degree, instance = None, n = None, mode = "sampled", budget = 1_000_000, tau = None, seed = 0))]
#[allow(clippy::too_many_arguments)]
fn lowdeg_distinguisher<'py>(
    py: Python<'py>,
    degree: u32,
    instance: Option<&PyInstance>,
    n: Option<usize>,
    mode: &str,
    budget: u64,
    tau: Option<f64>,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let mode: OracleMode = mode.parse().map_err(value_error)?;
    let config = match (mode, tau) {
        (OracleMode::Adversarial, Some(tau)) => StatOracleConfig::adversarial(tau, seed),
        _ => StatOracleConfig::with_mode(budget, mode, seed),
    };
    let source = match (instance, n) {
        (Some(i), _) => Source::Instance(&i.0),
        (None, Some(n)) => Source::Null { n },
        (None, None) => return Err(PyValueError::new_err("give an instance or the null dimension n")),
    };
    let report = sq::lowdeg_distinguisher(source, degree, &config).map_err(value_error)?;
    let out = to_python(py, &report)?;
    out.cast::<PyDict>()?;
    Ok(out)
}

#[pymodule]
#[pyo3(name = "sphereforge")]
fn sphereforge_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDesign>()?;
    m.add_class::<PyInstance>()?;
    m.add_function(wrap_pyfunction!(null_sample, m)?)?;
    m.add_function(wrap_pyfunction!(solve_weights, m)?)?;
    m.add_function(wrap_pyfunction!(solve_uniform_design, m)?)?;
    m.add_function(wrap_pyfunction!(sphere_points, m)?)?;
    m.add_function(wrap_pyfunction!(hoeffding_tolerance, m)?)?;
    m.add_function(wrap_pyfunction!(lowdeg_distinguisher, m)?)?;
    Ok(())
}
