//! Python bindings: the PID controller, the CSTR model and filter, and the
//! trajectory file helpers.

use std::path::PathBuf;

use nalgebra::SVector;
use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use rtmbe::dynamics::{nominal_input, steady_state, InputVector, MeasurementVector, StateVector};
use rtmbe::estimator::{build_cstr_filter, CstrFilterConfig, CstrUkf, SetupError};
use rtmbe::simulate::SimulationConfig;
use rtmbe::trajectory::TrajectoryError;
use rtmbe::{FilterError, PidError, PidParameters};

fn value_error(e: impl ToString) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn pid_error(e: PidError) -> PyErr {
    value_error(e)
}

fn filter_error(e: FilterError) -> PyErr {
    match e {
        FilterError::LengthMismatch { .. } | FilterError::InvalidConfig(_) => value_error(e),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn trajectory_error(e: TrajectoryError) -> PyErr {
    match e {
        TrajectoryError::File { .. } => PyIOError::new_err(e.to_string()),
        _ => value_error(e),
    }
}

fn to_array<const N: usize>(v: &SVector<f64, N>) -> [f64; N] {
    v.as_slice().try_into().expect("fixed-size vector")
}

fn to_rows<const N: usize>(v: &[SVector<f64, N>]) -> Vec<[f64; N]> {
    v.iter().map(to_array).collect()
}

fn from_rows<const N: usize>(rows: Vec<[f64; N]>) -> Vec<SVector<f64, N>> {
    rows.into_iter().map(SVector::from).collect()
}

/// Discrete PID controller with anti-windup tracking and bumpless gain changes.
#[pyclass(name = "PidController")]
struct PyPidController {
    inner: rtmbe::PidController,
}

#[allow(non_snake_case)]
#[pymethods]
impl PyPidController {
    #[new]
    #[pyo3(signature = (K=1.0, Ti=1.0, Td=0.0, Ts=1.0, *, Tt=None, N=10.0, b=1.0,
                        umin=f64::NEG_INFINITY, umax=f64::INFINITY))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        K: f64,
        Ti: f64,
        Td: f64,
        Ts: f64,
        Tt: Option<f64>,
        N: f64,
        b: f64,
        umin: f64,
        umax: f64,
    ) -> PyResult<Self> {
        let mut params = PidParameters::new(K, Ti, Td, Ts)
            .with_derivative_gain_limit(N)
            .with_setpoint_weight(b)
            .with_limits(umin, umax);
        if let Some(tt) = Tt {
            params = params.with_tracking_time(tt);
        }
        let inner = rtmbe::PidController::new(params).map_err(pid_error)?;
        Ok(Self { inner })
    }

    #[pyo3(signature = (r, y, uff=0.0))]
    fn calculate_control(&mut self, r: f64, y: f64, uff: f64) -> f64 {
        self.inner.calculate_control(r, y, uff)
    }

    fn set_K(&mut self, K: f64, r: f64, y: f64) -> PyResult<()> {
        self.inner.set_K(K, r, y).map_err(pid_error)
    }

    fn set_Ti(&mut self, Ti: f64) -> PyResult<()> {
        self.inner.set_Ti(Ti).map_err(pid_error)
    }

    fn set_Td(&mut self, Td: f64) -> PyResult<()> {
        self.inner.set_Td(Td).map_err(pid_error)
    }

    fn reset_state(&mut self) {
        self.inner.reset_state();
    }

    /// `(I, D, y_old)`.
    #[getter]
    fn state(&self) -> (f64, f64, f64) {
        let s = self.inner.state();
        (s.I, s.D, s.y_old)
    }

    /// `(K, Ti, Td, Tt, N, b, umin, umax, Ts)`.
    #[getter]
    fn params(&self) -> [f64; 9] {
        let p = self.inner.params();
        [p.K, p.Ti, p.Td, p.Tt, p.N, p.b, p.umin, p.umax, p.Ts]
    }

    fn __repr__(&self) -> String {
        let p = self.inner.params();
        format!(
            "PidController(K={}, Ti={}, Td={}, Ts={}, Tt={}, N={}, b={}, umin={}, umax={})",
            p.K, p.Ti, p.Td, p.Ts, p.Tt, p.N, p.b, p.umin, p.umax
        )
    }
}

/// Unscented Kalman filter on the default CSTR model.
#[pyclass(name = "CstrFilter")]
struct PyCstrFilter {
    inner: CstrUkf,
}

#[pymethods]
impl PyCstrFilter {
    #[new]
    #[pyo3(signature = (ts=rtmbe::estimator::DEFAULT_SAMPLE_TIME,
                        substeps=rtmbe::estimator::DEFAULT_SUBSTEPS, params=None))]
    fn new(ts: f64, substeps: usize, params: Option<PathBuf>) -> PyResult<Self> {
        let mut cfg = CstrFilterConfig {
            sample_time: ts,
            substeps,
            ..CstrFilterConfig::default()
        };
        if let Some(path) = params {
            cfg.params = rtmbe::ModelParameters::load(&path).map_err(value_error)?;
        }
        let inner = build_cstr_filter(&cfg).map_err(|e| match e {
            SetupError::Filter(f) => filter_error(f),
            SetupError::Discretize(d) => value_error(d),
        })?;
        Ok(Self { inner })
    }

    #[getter]
    fn mean(&self) -> [f64; 4] {
        to_array(&self.inner.belief().mean)
    }

    /// Covariance as a list of rows.
    #[getter]
    fn cov(&self) -> [[f64; 4]; 4] {
        let c = self.inner.belief().cov;
        std::array::from_fn(|i| std::array::from_fn(|j| c[(i, j)]))
    }

    fn predict(&mut self, u: [f64; 2]) -> PyResult<()> {
        self.inner
            .predict(&InputVector::from(u))
            .map_err(filter_error)
    }

    /// Measurement update; returns the log-likelihood increment.
    fn correct(&mut self, u: [f64; 2], y: [f64; 4]) -> PyResult<f64> {
        self.inner
            .correct(&InputVector::from(u), &MeasurementVector::from(y))
            .map_err(filter_error)
    }

    /// Runs the whole record; returns `(loglik, filtered_means)`.
    fn forward_trajectory(
        &mut self,
        us: Vec<[f64; 2]>,
        ys: Vec<[f64; 4]>,
    ) -> PyResult<(f64, Vec<[f64; 4]>)> {
        let sol = self
            .inner
            .forward_trajectory(&from_rows(us), &from_rows(ys))
            .map_err(filter_error)?;
        let means = sol.filtered.iter().map(|b| to_array(&b.mean)).collect();
        Ok((sol.ll, means))
    }
}

/// CSTR right-hand side with the default parameters.
#[pyfunction]
#[pyo3(signature = (x, u, t=0.0))]
fn cstr_derivative(x: [f64; 4], u: [f64; 2], t: f64) -> [f64; 4] {
    let dx = rtmbe::cstr_derivative(
        &StateVector::from(x),
        &InputVector::from(u),
        &rtmbe::cstr_default_parameters(),
        t,
    );
    to_array(&dx)
}

/// Default model parameters in config-file form.
#[pyfunction]
fn default_parameters() -> String {
    rtmbe::cstr_default_parameters().to_string()
}

#[pyfunction(name = "steady_state")]
fn py_steady_state() -> [f64; 4] {
    to_array(&steady_state())
}

#[pyfunction(name = "nominal_input")]
fn py_nominal_input() -> [f64; 2] {
    to_array(&nominal_input())
}

/// Synthetic CSTR data; returns `(inputs, measurements, states)`.
#[pyfunction]
#[pyo3(signature = (n, seed, noise_scale=1.0))]
#[allow(clippy::type_complexity)]
fn simulate(
    n: usize,
    seed: u64,
    noise_scale: f64,
) -> PyResult<(Vec<[f64; 2]>, Vec<[f64; 4]>, Vec<[f64; 4]>)> {
    if !(noise_scale.is_finite() && noise_scale >= 0.0) {
        return Err(value_error("noise_scale must be non-negative"));
    }
    let mut cfg = SimulationConfig::new(n, seed);
    cfg.measurement_std = cfg.measurement_std.map(|s| s * noise_scale);
    let data = rtmbe::simulate::simulate(&cfg).map_err(value_error)?;
    Ok((
        to_rows(&data.inputs),
        to_rows(&data.measurements),
        to_rows(&data.states),
    ))
}

#[pyfunction]
fn read_trajectories(
    u_path: PathBuf,
    y_path: PathBuf,
) -> PyResult<(Vec<[f64; 2]>, Vec<[f64; 4]>)> {
    let (us, ys) = rtmbe::read_trajectories(&u_path, &y_path).map_err(trajectory_error)?;
    Ok((to_rows(&us), to_rows(&ys)))
}

#[pyfunction]
fn write_trajectories(
    us: Vec<[f64; 2]>,
    ys: Vec<[f64; 4]>,
    u_path: PathBuf,
    y_path: PathBuf,
) -> PyResult<()> {
    rtmbe::write_trajectories(&from_rows(us), &from_rows(ys), &u_path, &y_path)
        .map_err(trajectory_error)
}

#[pymodule]
fn rtmbe_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPidController>()?;
    m.add_class::<PyCstrFilter>()?;
    m.add_function(wrap_pyfunction!(cstr_derivative, m)?)?;
    m.add_function(wrap_pyfunction!(default_parameters, m)?)?;
    m.add_function(wrap_pyfunction!(py_steady_state, m)?)?;
    m.add_function(wrap_pyfunction!(py_nominal_input, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(read_trajectories, m)?)?;
    m.add_function(wrap_pyfunction!(write_trajectories, m)?)?;
    Ok(())
}
