//! Python module `nested_alloc`.
//!
//! ```python
//! import nested_alloc as na
//! inst = na.Instance.generate("crashing", 1000, 1000, seed=7)
//! sol, stats = na.solve(inst, epsilon=1e-8)
//! assert na.verify_kkt(inst, sol.x, epsilon=1e-8).passed
//! ```

use std::time::Duration;

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyTimeoutError, PyValueError};
use pyo3::prelude::*;

use nested_alloc::hull;
use nested_alloc::model::{generate, integerize, read_instance, write_instance, CustomObjective, FamilyTag, Mode, ObjectiveSpec};
use nested_alloc::oracles::{self, KktTolerance, Verdict};
use nested_alloc::{Error, SolveOptions};

create_exception!(nested_alloc, NestedAllocError, PyException);

fn to_py(err: Error) -> PyErr {
    match err {
        Error::TimeLimit => PyTimeoutError::new_err(err.to_string()),
        Error::InvalidInstance { .. }
        | Error::NonInteger { .. }
        | Error::UnknownFamily(_)
        | Error::TooManyConstraints { .. }
        | Error::MissingEpsilon
        | Error::ModeMismatch(_) => PyValueError::new_err(err.to_string()),
        _ => NestedAllocError::new_err(err.to_string()),
    }
}

fn parse_mode(mode: &str) -> PyResult<Mode> {
    match mode {
        "int" | "integer" => Ok(Mode::Integer),
        "cont" | "continuous" => Ok(Mode::Continuous),
        _ => Err(PyValueError::new_err(format!("unknown mode `{mode}`"))),
    }
}

#[pyclass(module = "nested_alloc", name = "Instance", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyInstance {
    inner: nested_alloc::NestedInstance,
}

#[pymethods]
impl PyInstance {
    /// Generated benchmark instance. Integer mode rescales it so that `B`
    /// equals `total` (default `10 n`).
    #[staticmethod]
    #[pyo3(signature = (family, n, m=None, seed=0, mode="continuous", total=None))]
    fn generate(family: &str, n: usize, m: Option<usize>, seed: u64, mode: &str, total: Option<u32>) -> PyResult<Self> {
        let family: FamilyTag = family.parse().map_err(to_py)?;
        let inst = generate(family, n, m.unwrap_or(n), seed).map_err(to_py)?;
        let inner = match parse_mode(mode)? {
            Mode::Continuous => inst,
            Mode::Integer => {
                let total = total.unwrap_or_else(|| u32::try_from(10 * n).unwrap_or(u32::MAX));
                integerize(&inst, total)
            }
        };
        Ok(PyInstance { inner })
    }

    /// Instance from the JSON wire format.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        read_instance(text.as_bytes()).map(|inner| PyInstance { inner }).map_err(to_py)
    }

    /// Instance with a Python objective `value(i, x)` and optional
    /// `derivative(i, x)`; continuous mode needs the derivative.
    #[staticmethod]
    #[pyo3(signature = (s, a, b, lower, upper, value, derivative=None, mode="continuous"))]
    #[allow(clippy::too_many_arguments)]
    fn custom(
        s: Vec<usize>,
        a: Vec<f64>,
        b: f64,
        lower: Vec<f64>,
        upper: Vec<f64>,
        value: Py<PyAny>,
        derivative: Option<Py<PyAny>>,
        mode: &str,
    ) -> PyResult<Self> {
        let call = |f: Py<PyAny>| {
            move |i: usize, x: f64| Python::attach(|py| f.call1(py, (i, x)).and_then(|v| v.extract::<f64>(py)).unwrap_or(f64::NAN))
        };
        let n = lower.len();
        let mut objective = CustomObjective::new(n, call(value));
        if let Some(d) = derivative {
            objective = objective.with_derivative(call(d));
        }
        let inner = nested_alloc::NestedInstance {
            n,
            m: s.len(),
            s,
            a,
            b,
            lower,
            upper,
            objective: ObjectiveSpec::Custom(objective),
            mode: parse_mode(mode)?,
        };
        inner.validate().map_err(to_py)?;
        Ok(PyInstance { inner })
    }

    fn to_json(&self) -> PyResult<String> {
        let bytes = write_instance(&self.inner).map_err(to_py)?;
        Ok(String::from_utf8(bytes).expect("serde_json writes UTF-8"))
    }

    /// Objective value of an allocation.
    fn objective(&self, x: Vec<f64>) -> f64 {
        self.inner.objective_value(&x)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }
    #[getter]
    fn m(&self) -> usize {
        self.inner.m
    }
    #[getter]
    fn s(&self) -> Vec<usize> {
        self.inner.s.clone()
    }
    #[getter]
    fn a(&self) -> Vec<f64> {
        self.inner.a.clone()
    }
    #[getter(B)]
    fn b(&self) -> f64 {
        self.inner.b
    }
    #[getter]
    fn lower(&self) -> Vec<f64> {
        self.inner.lower.clone()
    }
    #[getter]
    fn upper(&self) -> Vec<f64> {
        self.inner.upper.clone()
    }
    #[getter]
    fn mode(&self) -> String {
        self.inner.mode.to_string()
    }
    #[getter]
    fn family(&self) -> &'static str {
        self.inner.objective.family().name()
    }

    fn __repr__(&self) -> String {
        format!("Instance(family={}, n={}, m={}, B={}, mode={})", self.family(), self.inner.n, self.inner.m, self.inner.b, self.inner.mode)
    }
}

#[pyclass(module = "nested_alloc", name = "Solution", frozen, get_all)]
struct PySolution {
    x: Vec<f64>,
    objective: f64,
    status: &'static str,
    epsilon: Option<f64>,
}

impl From<nested_alloc::Solution> for PySolution {
    fn from(sol: nested_alloc::Solution) -> Self {
        PySolution {
            status: if sol.is_optimal() { "optimal" } else { "infeasible" },
            x: sol.x,
            objective: sol.objective,
            epsilon: sol.epsilon,
        }
    }
}

#[pymethods]
impl PySolution {
    #[getter]
    fn optimal(&self) -> bool {
        self.status == "optimal"
    }

    fn __repr__(&self) -> String {
        format!("Solution(status={}, objective={}, n={})", self.status, self.objective, self.x.len())
    }
}

#[pyclass(module = "nested_alloc", name = "SolveStats", frozen, get_all)]
struct PySolveStats {
    rap_calls: usize,
    recursion_levels: usize,
    active_constraints: usize,
    wall_ms: f64,
}

#[pymethods]
impl PySolveStats {
    fn __repr__(&self) -> String {
        format!(
            "SolveStats(rap_calls={}, recursion_levels={}, active_constraints={}, wall_ms={:.3})",
            self.rap_calls, self.recursion_levels, self.active_constraints, self.wall_ms
        )
    }
}

#[pyclass(module = "nested_alloc", name = "KktReport", frozen, get_all)]
struct PyKktReport {
    passed: bool,
    max_within_block_gap: f64,
    boundary_violations: Vec<usize>,
    prefix_slacks: Vec<f64>,
    sum_residual: f64,
    box_violations: Vec<usize>,
    derivative_tolerance: f64,
    position_tolerance: f64,
}

#[pymethods]
impl PyKktReport {
    fn __repr__(&self) -> String {
        format!(
            "KktReport(passed={}, max_within_block_gap={:e}, boundary_violations={})",
            if self.passed { "True" } else { "False" },
            self.max_within_block_gap,
            self.boundary_violations.len()
        )
    }
}

/// Decomposition solver. Returns `(Solution, SolveStats)`; `epsilon` is
/// required for continuous instances.
#[pyfunction]
#[pyo3(signature = (instance, epsilon=None, time_limit_s=None))]
fn solve(instance: &PyInstance, epsilon: Option<f64>, time_limit_s: Option<f64>) -> PyResult<(PySolution, PySolveStats)> {
    let time_limit = time_limit_s
        .map(Duration::try_from_secs_f64)
        .transpose()
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    let (sol, stats) = nested_alloc::solve_with(&instance.inner, &SolveOptions { epsilon, time_limit }).map_err(to_py)?;
    let stats = PySolveStats {
        rap_calls: stats.rap_calls,
        recursion_levels: stats.recursion_levels,
        active_constraints: stats.active_constraints,
        wall_ms: stats.wall_ms,
    };
    Ok((sol.into(), stats))
}

/// Incremental greedy reference solver for integer instances.
#[pyfunction]
fn greedy(instance: &PyInstance) -> PyResult<PySolution> {
    oracles::greedy_nested(&instance.inner).map(Into::into).map_err(to_py)
}

/// Exhaustive dynamic program for small integer instances.
#[pyfunction]
fn brute_force(instance: &PyInstance) -> PyResult<PySolution> {
    oracles::brute_force_integer(&instance.inner).map(Into::into).map_err(to_py)
}

/// Convex-hull solution for scale-invariant families. Returns
/// `(Solution, active)`.
#[pyfunction]
fn hull_solve(instance: &PyInstance) -> PyResult<(PySolution, usize)> {
    let (sol, active) = hull::hull_solve_instance(&instance.inner).map_err(to_py)?;
    Ok((sol.into(), active))
}

/// Copy of `instance` whose boxes cannot bind, for the hull solver.
#[pyfunction]
#[pyo3(signature = (instance, floor=1e-9))]
fn lift_for_hull(instance: &PyInstance, floor: f64) -> PyInstance {
    PyInstance {
        inner: hull::lift_for_hull(&instance.inner, floor),
    }
}

/// Optimality check. `tau` fixes both tolerances; otherwise they are
/// calibrated from `epsilon` (zero for an exact check).
#[pyfunction]
#[pyo3(signature = (instance, x, epsilon=0.0, tau=None))]
fn verify_kkt(instance: &PyInstance, x: Vec<f64>, epsilon: f64, tau: Option<f64>) -> PyResult<PyKktReport> {
    let tol = match tau {
        Some(t) => KktTolerance {
            derivative: t,
            position: t,
        },
        None => KktTolerance::calibrated(&instance.inner, &x, epsilon),
    };
    let r = oracles::verify_kkt(&instance.inner, &x, tol).map_err(to_py)?;
    Ok(PyKktReport {
        passed: r.verdict == Verdict::Pass,
        max_within_block_gap: r.max_within_block_gap,
        boundary_violations: r.boundary_violations,
        prefix_slacks: r.prefix_slacks,
        sum_residual: r.sum_residual,
        box_violations: r.box_violations,
        derivative_tolerance: r.tolerance.derivative,
        position_tolerance: r.tolerance.position,
    })
}

/// Interior prefix constraints with `a_i - y_i <= tol`.
#[pyfunction]
#[pyo3(signature = (instance, x, tol=0.0))]
fn count_active(instance: &PyInstance, x: Vec<f64>, tol: f64) -> PyResult<usize> {
    if x.len() != instance.inner.n {
        return Err(PyValueError::new_err(format!("expected {} entries, got {}", instance.inner.n, x.len())));
    }
    Ok(oracles::count_active(&instance.inner, &x, tol))
}

/// `[(m, trials, mean_active, std_active)]` for hull solutions of generated
/// instances with `n = m`.
#[pyfunction]
#[pyo3(signature = (family, m_list, trials=50, seed=0))]
fn active_growth(family: &str, m_list: Vec<usize>, trials: usize, seed: u64) -> PyResult<Vec<(usize, usize, f64, f64)>> {
    let family: FamilyTag = family.parse().map_err(to_py)?;
    let rows = hull::active_growth_experiment(family, &m_list, trials, seed).map_err(to_py)?;
    Ok(rows.into_iter().map(|r| (r.m, r.trials, r.mean_active, r.std_active)).collect())
}

#[pymodule]
#[pyo3(name = "nested_alloc")]
fn nested_alloc_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyInstance>()?;
    m.add_class::<PySolution>()?;
    m.add_class::<PySolveStats>()?;
    m.add_class::<PyKktReport>()?;
    m.add("NestedAllocError", m.py().get_type::<NestedAllocError>())?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(greedy, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force, m)?)?;
    m.add_function(wrap_pyfunction!(hull_solve, m)?)?;
    m.add_function(wrap_pyfunction!(lift_for_hull, m)?)?;
    m.add_function(wrap_pyfunction!(verify_kkt, m)?)?;
    m.add_function(wrap_pyfunction!(count_active, m)?)?;
    m.add_function(wrap_pyfunction!(active_growth, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
