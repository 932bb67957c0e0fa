//! Python module `wbsim`: states, presets, evolution and the conserved
//! quantities of the Whitham-Boussinesq solver.

use std::sync::Arc;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use wb_core::dynamics::{evolve as core_evolve, IntegratorConfig, Method, SystemSpec};
use wb_core::functionals;
use wb_core::presets::Preset;
use wb_core::{Error, Field, Grid, Params, WaveState};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::BlowUp { .. } | Error::PicardDiverged { .. } | Error::StudyAborted(_) => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn params(kappa: f64, mu: f64, p: f64, s: f64) -> PyResult<Params> {
    Params::new(kappa, mu, p, s).map_err(py_err)
}

fn method(name: &str) -> PyResult<Method> {
    match name {
        "exponential_rk4" => Ok(Method::ExponentialRk4),
        "reference_rk4" => Ok(Method::ReferenceRk4),
        "picard_duhamel" => Ok(Method::PicardDuhamel),
        _ => Err(PyValueError::new_err(format!(
            "unknown method `{name}`; use exponential_rk4, reference_rk4 or picard_duhamel"
        ))),
    }
}

/// A surface elevation and velocity sampled on a periodic grid.
#[pyclass(name = "State", module = "wbsim")]
#[derive(Clone)]
pub struct PyState {
    inner: WaveState,
}

#[pymethods]
impl PyState {
    /// Build from sample lists. `vel` holds one list per dimension.
    #[new]
    #[pyo3(signature = (eta, vel, n, length, time=0.0))]
    fn new(eta: Vec<f64>, vel: Vec<Vec<f64>>, n: Vec<usize>, length: Vec<f64>, time: f64) -> PyResult<Self> {
        let grid = Grid::new(&n, &length).map_err(py_err)?;
        let field = |v: Vec<f64>| Field::new(grid.clone(), v).map_err(py_err);
        let vel = vel.into_iter().map(field).collect::<PyResult<Vec<_>>>()?;
        let inner = WaveState::new(field(eta)?, vel, time).map_err(py_err)?;
        Ok(Self { inner })
    }

    /// Build from a preset given as JSON, e.g. `{"preset": "single_mode", "amplitude": 0.1, "mode": 1}`.
    #[staticmethod]
    fn from_preset(preset: &str, n: Vec<usize>, length: Vec<f64>) -> PyResult<Self> {
        let preset: Preset = serde_json::from_str(preset).map_err(|e| PyValueError::new_err(e.to_string()))?;
        let grid: Arc<Grid> = Grid::new(&n, &length).map_err(py_err)?;
        Ok(Self { inner: preset.build(&grid).map_err(py_err)? })
    }

    /// Read a WBSNAP1 file.
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Self { inner: wb_core::snapshot::load_snapshot(path).map_err(py_err)? })
    }

    /// Write a WBSNAP1 file.
    fn save(&self, path: &str) -> PyResult<()> {
        wb_core::snapshot::save_snapshot(path, &self.inner).map_err(py_err)
    }

    #[getter]
    fn eta(&self) -> Vec<f64> {
        self.inner.eta.values().to_vec()
    }

    #[getter]
    fn vel(&self) -> Vec<Vec<f64>> {
        self.inner.vel.iter().map(|v| v.values().to_vec()).collect()
    }

    #[getter]
    fn time(&self) -> f64 {
        self.inner.time
    }

    #[getter]
    fn n(&self) -> Vec<usize> {
        self.inner.grid().shape().to_vec()
    }

    #[getter]
    fn length(&self) -> Vec<f64> {
        self.inner.grid().lengths().to_vec()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn curl_residue(&self) -> f64 {
        self.inner.curl_residue()
    }

    fn __repr__(&self) -> String {
        format!("State(n={:?}, length={:?}, time={})", self.n(), self.length(), self.inner.time)
    }
}

#[pyfunction]
#[pyo3(signature = (state, kappa=1.0))]
fn hamiltonian(state: &PyState, kappa: f64) -> PyResult<f64> {
    Ok(functionals::hamiltonian(&state.inner, &params(kappa, 0.0, 1.0, 0.5)?))
}

#[pyfunction]
fn momentum(state: &PyState) -> PyResult<f64> {
    functionals::momentum(&state.inner).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (state, s, kappa=1.0))]
fn modified_energy(state: &PyState, s: f64, kappa: f64) -> PyResult<f64> {
    functionals::modified_energy(&state.inner, &params(kappa, 0.0, 1.0, s)?).map_err(py_err)
}

/// Norm of `(eta, v)` in `H_kappa^{s+1/2} x H^s`.
#[pyfunction]
#[pyo3(signature = (state, s=0.5, kappa=1.0))]
fn weighted_norm(state: &PyState, s: f64, kappa: f64) -> f64 {
    functionals::weighted_norm(&state.inner, s, kappa)
}

/// Integrate `state` over `horizon`. Returns a dict with the report times,
/// monitored quantities, the states at report times, `blow_up` (time or
/// None) and `steps`.
#[pyfunction]
#[pyo3(signature = (state, horizon, dt, kappa=1.0, mu=0.0, p=1.0, s=0.5, report_every=None, method="exponential_rk4"))]
#[allow(clippy::too_many_arguments)]
fn evolve<'py>(
    py: Python<'py>,
    state: &PyState,
    horizon: f64,
    dt: f64,
    kappa: f64,
    mu: f64,
    p: f64,
    s: f64,
    report_every: Option<f64>,
    method: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let prm = params(kappa, mu, p, s)?;
    let spec = SystemSpec::from_params(state.inner.dim(), prm).map_err(py_err)?;
    let cfg = IntegratorConfig::new(self::method(method)?, dt).map_err(py_err)?;
    let every = report_every.unwrap_or(if horizon > 0.0 { horizon } else { 1.0 });
    let u0 = state.inner.clone();
    let traj = py
        .allow_threads(|| core_evolve(&u0, &spec, &cfg, horizon, every))
        .map_err(py_err)?;
    let out = PyDict::new_bound(py);
    out.set_item("times", traj.times())?;
    out.set_item("hamiltonian", traj.reports.iter().map(|r| r.hamiltonian).collect::<Vec<_>>())?;
    out.set_item("momentum", traj.reports.iter().map(|r| r.momentum).collect::<Vec<_>>())?;
    out.set_item("weighted_norm", traj.reports.iter().map(|r| r.weighted_norm).collect::<Vec<_>>())?;
    out.set_item("blow_up", traj.blow_up)?;
    out.set_item("steps", traj.steps)?;
    let states: Vec<PyState> = traj.states.into_iter().map(|inner| PyState { inner }).collect();
    out.set_item("states", states.into_py(py))?;
    Ok(out)
}

/// Run the `wb` command line in-process; returns its exit code.
#[pyfunction]
fn cli(args: Vec<String>) -> i32 {
    wb_core::cli::run_cli(std::iter::once("wb".to_string()).chain(args))
}

#[pymodule]
fn wbsim(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyState>()?;
    m.add_function(wrap_pyfunction!(hamiltonian, m)?)?;
    m.add_function(wrap_pyfunction!(momentum, m)?)?;
    m.add_function(wrap_pyfunction!(modified_energy, m)?)?;
    m.add_function(wrap_pyfunction!(weighted_norm, m)?)?;
    m.add_function(wrap_pyfunction!(evolve, m)?)?;
    m.add_function(wrap_pyfunction!(cli, m)?)?;
    Ok(())
}
