//! Python bindings for the `gsadmm` solver and its structural diagnostics.
//!
//! Matrices and vectors cross the boundary as nested lists of floats, so the
//! module has no numpy dependency.

use gsadmm::generators::{Family, GenSpec};
use gsadmm::harness::check::check;
use gsadmm::harness::document::parse_policy;
use gsadmm::harness::run::run_instance;
use gsadmm::harness::{self, Instance};
use gsadmm::model::{self, validate_config};
use gsadmm::{Error, Iterate, Matrix, Solver, SolverConfig, StructuralMatrices, Termination, Vector};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

create_exception!(pygsadmm, SolverError, PyException, "Runtime or generation failure inside the solver.");

fn to_py(err: Error) -> PyErr {
    match harness::exit_code(&err) {
        harness::EXIT_VALIDATION => PyValueError::new_err(err.to_string()),
        _ => SolverError::new_err(err.to_string()),
    }
}

fn vec_list(v: &Vector) -> Vec<f64> {
    v.iter().copied().collect()
}

fn matrix_rows(m: &Matrix) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn iterate_dict<'py>(py: Python<'py>, w: &Iterate) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("x", w.x.iter().map(vec_list).collect::<Vec<_>>())?;
    d.set_item("y", w.y.iter().map(vec_list).collect::<Vec<_>>())?;
    d.set_item("lambda", vec_list(&w.lambda))?;
    Ok(d)
}

fn json_to_py<'py>(py: Python<'py>, v: &serde_json::Value) -> PyResult<Bound<'py, PyAny>> {
    use serde_json::Value;
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        Value::Number(n) => match n.as_i64() {
            Some(i) => i.into_pyobject(py)?.into_any(),
            None => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any(),
        },
        Value::String(s) => match s.as_str() {
            "inf" | "-inf" | "NaN" => s.parse::<f64>().unwrap_or(f64::NAN).into_pyobject(py)?.into_any(),
            _ => s.into_pyobject(py)?.into_any(),
        },
        Value::Array(items) => {
            let list = PyList::empty(py);
            for it in items {
                list.append(json_to_py(py, it)?)?;
            }
            list.into_any()
        }
        Value::Object(map) => {
            let d = PyDict::new(py);
            for (k, it) in map {
                d.set_item(k, json_to_py(py, it)?)?;
            }
            d.into_any()
        }
    })
}

/// A block-separable problem, optionally with its reference solution.
#[pyclass(module = "pygsadmm", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct Problem {
    inner: Instance,
}

#[pymethods]
impl Problem {
    /// Parse an instance document.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Instance::from_json(text).map(|inner| Problem { inner }).map_err(to_py)
    }

    #[staticmethod]
    fn load(path: std::path::PathBuf) -> PyResult<Self> {
        Instance::read(&path).map(|inner| Problem { inner }).map_err(to_py)
    }

    /// A bundled instance such as `qp1` or `quadratic-42`.
    #[staticmethod]
    fn bundled(name: &str) -> PyResult<Self> {
        harness::bundled(name).map(|b| Problem { inner: Instance::from_bundle(&b) }).map_err(to_py)
    }

    /// Generate a seeded instance of the `quadratic`, `l1` or `boxqp` family.
    #[staticmethod]
    #[pyo3(signature = (family, x_dims, y_dims, n, seed = 1))]
    fn generate(family: &str, x_dims: Vec<usize>, y_dims: Vec<usize>, n: usize, seed: u64) -> PyResult<Self> {
        let fam = Family::parse(family)
            .ok_or_else(|| PyValueError::new_err(format!("unknown family {family:?}; use quadratic, l1 or boxqp")))?;
        let bundle = fam.generate(&GenSpec::new(x_dims, y_dims, n), seed).map_err(to_py)?;
        Ok(Problem { inner: Instance::from_bundle(&bundle) })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn name(&self) -> &str {
        &self.inner.name
    }

    #[getter]
    fn p(&self) -> usize {
        self.inner.problem.p()
    }

    #[getter]
    fn q(&self) -> usize {
        self.inner.problem.q()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.problem.n()
    }

    #[getter]
    fn x_dims(&self) -> Vec<usize> {
        self.inner.problem.x_dims()
    }

    #[getter]
    fn y_dims(&self) -> Vec<usize> {
        self.inner.problem.y_dims()
    }

    /// Reference solution `{"x", "y", "lambda"}`, or `None`.
    fn reference<'py>(&self, py: Python<'py>) -> PyResult<Option<Bound<'py, PyDict>>> {
        self.inner.reference.as_ref().map(|r| iterate_dict(py, &r.w_star)).transpose()
    }

    /// Norm of the KKT error map at the reference solution.
    fn kkt_residual(&self) -> PyResult<f64> {
        let r = self.inner.reference.as_ref().ok_or_else(|| PyValueError::new_err("problem has no reference solution"))?;
        Ok(gsadmm::diagnostics::error_map_residual(&self.inner.problem, &r.w_star).norm())
    }

    fn __repr__(&self) -> String {
        format!("Problem(name={:?}, x_dims={:?}, y_dims={:?}, n={})", self.inner.name, self.x_dims(), self.y_dims(), self.n())
    }
}

/// Solver parameters. `sigma1`/`sigma2` left as `None` take the defaults
/// `p − 0.5` and `q − 0.5` of the problem they are used with.
#[pyclass(module = "pygsadmm", get_all, set_all, skip_from_py_object)]
#[derive(Clone)]
pub struct Config {
    beta: f64,
    tau: f64,
    s: f64,
    sigma1: Option<f64>,
    sigma2: Option<f64>,
    max_iters: usize,
    tol: f64,
    policy: String,
}

#[pymethods]
impl Config {
    #[new]
    #[pyo3(signature = (
        beta = SolverConfig::DEFAULT_BETA,
        tau = SolverConfig::DEFAULT_TAU,
        s = SolverConfig::DEFAULT_S,
        sigma1 = None,
        sigma2 = None,
        max_iters = SolverConfig::DEFAULT_MAX_ITERS,
        tol = SolverConfig::DEFAULT_TOL,
        policy = "D".to_string(),
    ))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        beta: f64,
        tau: f64,
        s: f64,
        sigma1: Option<f64>,
        sigma2: Option<f64>,
        max_iters: usize,
        tol: f64,
        policy: String,
    ) -> Self {
        Config { beta, tau, s, sigma1, sigma2, max_iters, tol, policy }
    }

    fn __repr__(&self) -> String {
        format!(
            "Config(beta={}, tau={}, s={}, sigma1={:?}, sigma2={:?}, max_iters={}, tol={}, policy={:?})",
            self.beta, self.tau, self.s, self.sigma1, self.sigma2, self.max_iters, self.tol, self.policy
        )
    }
}

impl Config {
    fn resolve(&self, problem: &Problem) -> PyResult<SolverConfig> {
        let mut cfg = SolverConfig::for_problem(&problem.inner.problem);
        cfg.beta = self.beta;
        cfg.tau = self.tau;
        cfg.s = self.s;
        if let Some(v) = self.sigma1 {
            cfg.sigma1 = v;
        }
        if let Some(v) = self.sigma2 {
            cfg.sigma2 = v;
        }
        cfg.max_iters = self.max_iters;
        cfg.tol = self.tol;
        cfg.region_policy = parse_policy(&self.policy).map_err(to_py)?;
        validate_config(&cfg, &problem.inner.problem).into_result().map_err(to_py)?;
        Ok(cfg)
    }
}

fn resolve(problem: &Problem, config: Option<&Config>) -> PyResult<SolverConfig> {
    match config {
        Some(c) => c.resolve(problem),
        None => Ok(SolverConfig::for_problem(&problem.inner.problem)),
    }
}

/// Parameters without range validation, for structural inspection outside 𝒟.
fn unvalidated(problem: &Problem, config: Option<&Config>) -> SolverConfig {
    let mut cfg = SolverConfig::for_problem(&problem.inner.problem);
    if let Some(c) = config {
        cfg.beta = c.beta;
        cfg.tau = c.tau;
        cfg.s = c.s;
        cfg.sigma1 = c.sigma1.unwrap_or(cfg.sigma1);
        cfg.sigma2 = c.sigma2.unwrap_or(cfg.sigma2);
    }
    cfg
}

/// Run the solver and return the final iterate plus per-iteration traces.
#[pyfunction]
#[pyo3(signature = (problem, config = None))]
fn solve<'py>(py: Python<'py>, problem: &Problem, config: Option<&Config>) -> PyResult<Bound<'py, PyDict>> {
    let cfg = resolve(problem, config)?;
    let mut solver = Solver::new(&problem.inner.problem, cfg).map_err(to_py)?;
    if let Some(r) = &problem.inner.reference {
        solver = solver.with_reference(r.w_star.clone()).map_err(to_py)?;
    }
    let trace = py.detach(|| solver.solve(None)).map_err(to_py)?;
    let d = iterate_dict(py, &trace.final_iterate)?;
    let termination = match trace.termination {
        Termination::Converged => "converged",
        Termination::IterationCap => "iteration-cap",
    };
    d.set_item("termination", termination)?;
    d.set_item("iterations", trace.len())?;
    d.set_item("certified", trace.certified)?;
    let recs = &trace.records;
    d.set_item("feasibility", recs.iter().map(|r| r.feasibility).collect::<Vec<_>>())?;
    d.set_item("correction_residual", recs.iter().map(|r| r.correction_residual).collect::<Vec<_>>())?;
    d.set_item("identity_error", recs.iter().map(|r| r.identity_error).collect::<Vec<_>>())?;
    d.set_item("composite_residual", recs.iter().map(|r| r.composite_residual()).collect::<Vec<_>>())?;
    d.set_item("dist_H", recs.iter().map(|r| r.dist_h).collect::<Vec<_>>())?;
    d.set_item("contraction_slack", recs.iter().map(|r| r.contraction_slack).collect::<Vec<_>>())?;
    Ok(d)
}

/// Solve and evaluate every applicable convergence check; returns the flat
/// report as a dict.
#[pyfunction]
#[pyo3(signature = (problem, config = None))]
fn run<'py>(py: Python<'py>, problem: &Problem, config: Option<&Config>) -> PyResult<Bound<'py, PyDict>> {
    let cfg = resolve(problem, config)?;
    let outcome = py.detach(|| run_instance(&problem.inner, &cfg)).map_err(to_py)?;
    let d = PyDict::new(py);
    for (k, v) in &outcome.report.0 {
        d.set_item(k, json_to_py(py, v)?)?;
    }
    d.set_item("checks_passed", outcome.checks_passed())?;
    Ok(d)
}

/// `Q`, `M`, `G`, `H` as row lists, plus the spectral summary. Works for
/// any `(τ, s)` with `τ + s ≠ 0`, inside the certified region or not.
#[pyfunction]
#[pyo3(signature = (problem, config = None))]
fn structural_matrices<'py>(
    py: Python<'py>,
    problem: &Problem,
    config: Option<&Config>,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = unvalidated(problem, config);
    let m = StructuralMatrices::assemble(&problem.inner.problem, &cfg).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("Q", matrix_rows(&m.q))?;
    d.set_item("Q_tilde", matrix_rows(&m.q_tilde))?;
    d.set_item("M", matrix_rows(&m.m))?;
    d.set_item("G", matrix_rows(&m.g))?;
    d.set_item("H", matrix_rows(&m.h))?;
    d.set_item("lambda_min_G", m.spectral.lambda_min_g)?;
    d.set_item("lambda_min_H", m.spectral.lambda_min_h)?;
    d.set_item("xi", m.spectral.xi)?;
    d.set_item("G_positive_definite", m.spectral.g_positive_definite)?;
    d.set_item("H_positive_definite", m.spectral.h_positive_definite)?;
    Ok(d)
}

/// Structural checks as `(name, passed, detail)` tuples.
#[pyfunction]
#[pyo3(signature = (problem, config = None))]
fn check_problem(problem: &Problem, config: Option<&Config>) -> PyResult<Vec<(String, bool, String)>> {
    let cfg = unvalidated(problem, config);
    Ok(check(&problem.inner, &cfg).into_iter().map(|c| (c.name, c.passed, c.detail)).collect())
}

#[pyfunction]
fn in_region_g(tau: f64, s: f64) -> bool {
    model::in_region_g(tau, s)
}

#[pyfunction]
fn in_region_d(tau: f64, s: f64) -> bool {
    model::in_region_d(tau, s)
}

/// Names of the bundled instances.
#[pyfunction]
fn catalog() -> Vec<String> {
    gsadmm::generators::catalog().into_iter().map(|b| b.name).collect()
}

#[pymodule]
fn pygsadmm(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Problem>()?;
    m.add_class::<Config>()?;
    m.add("SolverError", m.py().get_type::<SolverError>())?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(structural_matrices, m)?)?;
    m.add_function(wrap_pyfunction!(check_problem, m)?)?;
    m.add_function(wrap_pyfunction!(in_region_g, m)?)?;
    m.add_function(wrap_pyfunction!(in_region_d, m)?)?;
    m.add_function(wrap_pyfunction!(catalog, m)?)?;
    Ok(())
}
