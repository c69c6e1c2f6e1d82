//! Python bindings: orbit spaces, invariant designs, the solver, the
//! optimality certificate, the ascent oracle, and run-count apportionment.

use std::collections::BTreeMap;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use rfd_core as core;
use rfd_core::verify::{DEFAULT_EQUIVALENCE_TOLERANCE, DEFAULT_ORACLE_MAX_ITER, DEFAULT_ORACLE_TOLERANCE};

fn value_error(e: core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Design points grouped by their count of +1 levels, restricted to counts
/// in `[lower, upper]`.
#[pyclass(name = "OrbitSpace", frozen, from_py_object)]
#[derive(Clone)]
struct PyOrbitSpace {
    inner: core::OrbitSpace,
}

#[pymethods]
impl PyOrbitSpace {
    #[new]
    fn new(factors: u32, lower: u32, upper: u32) -> PyResult<Self> {
        Ok(Self {
            inner: core::OrbitSpace::new(factors, lower, upper).map_err(value_error)?,
        })
    }

    #[getter]
    fn factors(&self) -> u32 {
        self.inner.factors()
    }

    #[getter]
    fn lower(&self) -> u32 {
        self.inner.lower()
    }

    #[getter]
    fn upper(&self) -> u32 {
        self.inner.upper()
    }

    fn orbits(&self) -> Vec<u32> {
        self.inner.orbits().collect()
    }

    fn orbit_size(&self, k: u32) -> PyResult<u64> {
        self.inner.orbit_size(k).map_err(value_error)
    }

    fn region_size(&self) -> u64 {
        self.inner.region_size()
    }

    fn __repr__(&self) -> String {
        format!(
            "OrbitSpace(factors={}, lower={}, upper={})",
            self.inner.factors(),
            self.inner.lower(),
            self.inner.upper()
        )
    }
}

/// A probability vector over the orbits of a space.
#[pyclass(name = "OrbitDesign", frozen, from_py_object)]
#[derive(Clone)]
struct PyOrbitDesign {
    inner: core::OrbitDesign,
}

#[pymethods]
impl PyOrbitDesign {
    #[new]
    fn new(space: PyOrbitSpace, weights: BTreeMap<u32, f64>) -> PyResult<Self> {
        Ok(Self {
            inner: core::OrbitDesign::new(space.inner, weights).map_err(value_error)?,
        })
    }

    #[getter]
    fn space(&self) -> PyOrbitSpace {
        PyOrbitSpace {
            inner: *self.inner.space(),
        }
    }

    #[getter]
    fn weights(&self) -> BTreeMap<u32, f64> {
        self.inner.weights().clone()
    }

    fn weight(&self, k: u32) -> f64 {
        self.inner.weight(k)
    }

    /// `(m1, m2)`: the common per-coordinate mean and mixed second moment.
    fn moments(&self) -> (f64, f64) {
        let moments = self.inner.moments();
        (moments.m1, moments.m2)
    }

    fn efficiency(&self) -> f64 {
        core::d_efficiency(&self.inner)
    }

    fn det_information(&self) -> f64 {
        core::det_information(self.inner.moments(), self.inner.space().factors())
    }

    fn is_regular(&self) -> bool {
        core::is_regular(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!("OrbitDesign(weights={:?})", self.inner.weights())
    }
}

/// Result of the optimality certificate.
#[pyclass(name = "Certificate", frozen)]
struct PyCertificate {
    #[pyo3(get)]
    max_sensitivity: f64,
    #[pyo3(get)]
    argmax_orbit: u32,
    #[pyo3(get)]
    bound: f64,
    #[pyo3(get)]
    slack_per_orbit: BTreeMap<u32, f64>,
    #[pyo3(get)]
    tolerance: f64,
    #[pyo3(get, name = "passed")]
    pass: bool,
}

impl PyCertificate {
    fn from_report(report: core::EquivalenceReport) -> Self {
        Self {
            max_sensitivity: report.max_sensitivity,
            argmax_orbit: report.argmax_orbit,
            bound: report.bound,
            slack_per_orbit: report.slack_per_orbit,
            tolerance: report.tolerance,
            pass: report.pass,
        }
    }
}

#[pymethods]
impl PyCertificate {
    fn __repr__(&self) -> String {
        format!(
            "Certificate(pass={}, max_sensitivity={}, bound={})",
            self.pass, self.max_sensitivity, self.bound
        )
    }
}

/// A solved instance: the design, its classification, and its certificate.
#[pyclass(name = "Solution", frozen)]
struct PySolution {
    #[pyo3(get)]
    design: PyOrbitDesign,
    #[pyo3(get)]
    case: String,
    #[pyo3(get)]
    discriminant: i64,
    #[pyo3(get)]
    construction: String,
    #[pyo3(get)]
    efficiency: f64,
    /// Rational weights as "p/q" strings where the construction is exact.
    #[pyo3(get)]
    exact_weights: Option<BTreeMap<u32, String>>,
}

#[pymethods]
impl PySolution {
    fn certificate(&self) -> PyResult<PyCertificate> {
        equivalence_check(&self.design, None)
    }

    fn __repr__(&self) -> String {
        format!(
            "Solution(case={:?}, construction={:?}, efficiency={})",
            self.case, self.construction, self.efficiency
        )
    }
}

/// Run counts per orbit after apportioning a finite run budget.
#[pyclass(name = "ExactDesign", frozen)]
struct PyExactDesign {
    inner: core::ExactDesign,
}

#[pymethods]
impl PyExactDesign {
    #[getter]
    fn runs(&self) -> u64 {
        self.inner.runs()
    }

    #[getter]
    fn orbit_runs(&self) -> BTreeMap<u32, u64> {
        self.inner.orbit_runs().clone()
    }

    /// The realized runs as rows of ±1 levels.
    fn rows(&self) -> PyResult<Vec<Vec<i8>>> {
        let points = core::realize_matrix(&self.inner).map_err(value_error)?;
        Ok(points.iter().map(|point| point.coords().to_vec()).collect())
    }

    fn efficiency(&self) -> PyResult<f64> {
        core::exact_efficiency(&self.inner).map_err(value_error)
    }

    fn __repr__(&self) -> String {
        format!(
            "ExactDesign(runs={}, orbit_runs={:?})",
            self.inner.runs(),
            self.inner.orbit_runs()
        )
    }
}

/// Solves an instance and certifies the result.
#[pyfunction]
fn solve(space: PyOrbitSpace) -> PySolution {
    let report = core::solve(space.inner);
    PySolution {
        design: PyOrbitDesign {
            inner: report.design,
        },
        case: report.case.label().to_string(),
        discriminant: report.discriminant,
        construction: report.construction.label().to_string(),
        efficiency: report.efficiency,
        exact_weights: report.exact_weights.map(|weights| {
            weights
                .iter()
                .map(|(&k, r)| (k, r.to_string()))
                .collect()
        }),
    }
}

/// Checks a design against the variance bound that characterizes optimality.
#[pyfunction]
#[pyo3(signature = (design, tolerance=None))]
fn equivalence_check(design: &PyOrbitDesign, tolerance: Option<f64>) -> PyResult<PyCertificate> {
    let tolerance = tolerance.unwrap_or(DEFAULT_EQUIVALENCE_TOLERANCE);
    core::equivalence_check(&design.inner, tolerance)
        .map(PyCertificate::from_report)
        .map_err(value_error)
}

/// Multiplicative-ascent oracle. Returns `(weights, det, iterations,
/// converged)`.
#[pyfunction]
#[pyo3(signature = (space, max_iter=None, tolerance=None))]
fn brute_force_solve(
    space: PyOrbitSpace,
    max_iter: Option<u64>,
    tolerance: Option<f64>,
) -> (BTreeMap<u32, f64>, f64, u64, bool) {
    let result = core::brute_force_solve(
        space.inner,
        max_iter.unwrap_or(DEFAULT_ORACLE_MAX_ITER),
        tolerance.unwrap_or(DEFAULT_ORACLE_TOLERANCE),
    );
    (result.weights, result.det, result.iterations, result.converged)
}

/// Apportions `runs` runs across the design's orbits.
#[pyfunction]
fn round_to_exact(design: &PyOrbitDesign, runs: u64) -> PyResult<PyExactDesign> {
    Ok(PyExactDesign {
        inner: core::round_to_exact(&design.inner, runs).map_err(value_error)?,
    })
}

#[pymodule]
fn rfd_python(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyOrbitSpace>()?;
    m.add_class::<PyOrbitDesign>()?;
    m.add_class::<PyCertificate>()?;
    m.add_class::<PySolution>()?;
    m.add_class::<PyExactDesign>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(equivalence_check, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force_solve, m)?)?;
    m.add_function(wrap_pyfunction!(round_to_exact, m)?)?;
    Ok(())
}
