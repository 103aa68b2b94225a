//! Python bindings: instances, solvers, classification, theory curves and
//! logistic transition fits.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use phaselab::experiment::glm::{fit_cells, BinomialCell};
use phaselab::experiment::records::read_trials_file;
use phaselab::experiment::{assess, fit_all, FailureMode};
use phaselab::{Complex64, CurveKind, EnsembleKind, EnsembleSpec, SignalModel, SolverConfig, Variant};

fn py_err(e: phaselab::Error) -> PyErr {
    match e {
        phaselab::Error::InvalidInput(_) | phaselab::Error::DimensionMismatch { .. } => {
            PyValueError::new_err(e.to_string())
        }
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn parse<T: std::str::FromStr<Err = phaselab::Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(py_err)
}

/// A random k-sparse basis-pursuit instance `A x = b`.
#[pyclass(name = "Instance", frozen)]
struct PyInstance {
    inner: phaselab::SparseInstance,
}

#[pymethods]
impl PyInstance {
    #[new]
    #[pyo3(signature = (ensemble, N, delta, rho, seed, signal = "circular-gaussian"))]
    #[allow(non_snake_case)]
    fn new(ensemble: &str, N: usize, delta: f64, rho: f64, seed: u64, signal: &str) -> PyResult<Self> {
        let spec = EnsembleSpec::new(parse::<EnsembleKind>(ensemble)?).with_signal(parse::<SignalModel>(signal)?);
        let inner = phaselab::make_instance(spec, N, delta, rho, seed).map_err(py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn x_true(&self) -> Vec<Complex64> {
        self.inner.x_true.as_slice().to_vec()
    }

    #[getter]
    fn b(&self) -> Vec<Complex64> {
        self.inner.b.as_slice().to_vec()
    }

    #[getter(N)]
    fn signal_len(&self) -> usize {
        self.inner.signal_len
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.measurements
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.sparsity
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed()
    }

    /// Row-major dense copy of the orthonormalized operator.
    fn matrix(&self) -> Vec<Vec<Complex64>> {
        let a = self.inner.operator.to_dense();
        (0..a.nrows()).map(|i| (0..a.ncols()).map(|j| a[(i, j)]).collect()).collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Instance({}, N={}, n={}, k={}, seed={})",
            self.inner.ensemble.kind,
            self.inner.signal_len,
            self.inner.measurements,
            self.inner.sparsity,
            self.inner.seed()
        )
    }
}

#[pyclass(name = "SolveResult", frozen, get_all)]
struct PyResult_ {
    x_hat: Vec<Complex64>,
    outer_iters: usize,
    inner_iters: usize,
    feasibility: f64,
    l1_value: f64,
    objective: &'static str,
    converged: bool,
    status: &'static str,
    rrmse: f64,
    l1_ratio: f64,
}

#[pymethods]
impl PyResult_ {
    fn __repr__(&self) -> String {
        format!("SolveResult(status={}, rrmse={:.3e}, outer_iters={})", self.status, self.rrmse, self.outer_iters)
    }
}

/// Solves the instance and classifies the outcome against its ground truth.
#[pyfunction]
#[pyo3(signature = (instance, variant = "exact", indirect = false))]
fn solve(py: Python<'_>, instance: &PyInstance, variant: &str, indirect: bool) -> PyResult<PyResult_> {
    let variant = match variant {
        "exact" => Variant::Exact,
        "relaxed" => Variant::Relaxed,
        other => return Err(PyValueError::new_err(format!("variant must be exact or relaxed, got {other}"))),
    };
    let cfg = SolverConfig::for_variant(variant);
    let inst = &instance.inner;
    let (result, a) = py
        .detach(|| {
            let r = if indirect { phaselab::solve_indirect(inst, &cfg)? } else { phaselab::solve(inst, &cfg)? };
            let a = assess(&r, &inst.x_true)?;
            Ok((r, a))
        })
        .map_err(py_err)?;
    Ok(PyResult_ {
        x_hat: result.x_hat.as_slice().to_vec(),
        outer_iters: result.outer_iters,
        inner_iters: result.total_inner_iters,
        feasibility: result.feasibility_residual,
        l1_value: result.l1_value,
        objective: match result.objective {
            phaselab::solver::Objective::ComplexL1 => "complex-l1",
            phaselab::solver::Objective::RealL1 => "real-l1",
        },
        converged: result.converged,
        status: a.status.name(),
        rrmse: a.rrmse,
        l1_ratio: a.l1_ratio,
    })
}

/// Complex soft threshold `max(|w| − ε, 0)·w/|w|`.
#[pyfunction]
fn soft_threshold(w: Complex64, eps: f64) -> Complex64 {
    phaselab::solver::soft_threshold(w, eps)
}

/// Theoretical weak transition ρ(δ) for `real-l1` or `complex-l1`.
#[pyfunction]
fn transition(kind: &str, delta: f64) -> PyResult<f64> {
    parse::<CurveKind>(kind)?.transition(delta).map_err(py_err)
}

/// Samples `(delta, rho)` pairs of a theoretical curve.
#[pyfunction]
fn curve(kind: &str, deltas: Vec<f64>) -> PyResult<Vec<(f64, f64)>> {
    let c = phaselab::TransitionCurve::sample(parse::<CurveKind>(kind)?, &deltas).map_err(py_err)?;
    Ok(c.samples)
}

/// Logistic fit to per-ρ success counts; returns
/// `(rho50, slope, intercept, separated)`.
#[pyfunction]
fn fit_counts(delta: f64, rhos: Vec<f64>, successes: Vec<usize>, trials: Vec<usize>) -> PyResult<(f64, f64, f64, bool)> {
    if rhos.len() != successes.len() || rhos.len() != trials.len() {
        return Err(PyValueError::new_err("rhos, successes and trials must have equal length"));
    }
    let cells: Vec<BinomialCell> = rhos
        .into_iter()
        .zip(successes)
        .zip(trials)
        .map(|((rho, successes), trials)| BinomialCell { rho, successes, trials })
        .collect();
    let est = fit_cells(delta, &cells).map_err(py_err)?;
    Ok((est.rho50, est.slope, est.intercept, est.separated))
}

/// Fits every (ensemble, N, δ) group in a trials CSV; rows are
/// `(ensemble, N, delta, rho50 or None)`.
#[pyfunction]
#[pyo3(signature = (path, exclude_solver_failures = false))]
fn fit_trials(path: std::path::PathBuf, exclude_solver_failures: bool) -> PyResult<Vec<(String, usize, f64, Option<f64>)>> {
    let (_, records) = read_trials_file(&path).map_err(py_err)?;
    let mode = if exclude_solver_failures { FailureMode::Exclude } else { FailureMode::CountAsFailure };
    Ok(fit_all(&records, mode).into_iter().map(|r| (r.ensemble, r.signal_len, r.delta, r.rho50)).collect())
}

#[pymodule]
fn phaselab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyInstance>()?;
    m.add_class::<PyResult_>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(soft_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(transition, m)?)?;
    m.add_function(wrap_pyfunction!(curve, m)?)?;
    m.add_function(wrap_pyfunction!(fit_counts, m)?)?;
    m.add_function(wrap_pyfunction!(fit_trials, m)?)?;
    Ok(())
}
