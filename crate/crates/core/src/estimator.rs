//! The CSTR state estimator: RK4-discretized model dynamics inside a UKF,
//! with default tuning.

use nalgebra::{SMatrix, SVector};
use thiserror::Error;

use crate::dynamics::{
    cstr_default_parameters, cstr_derivative, cstr_measurement, steady_state, InputVector,
    MeasurementVector, ModelParameters, StateVector, INPUT_DIM, MEASUREMENT_DIM, STATE_DIM,
};
use crate::integrator::{discretize, DiscretizeError, Discretized};
use crate::ukf::{FilterError, GaussianBelief, UkfFilter, UtConfig};

/// Sample time in hours.
pub const DEFAULT_SAMPLE_TIME: f64 = 0.005;
pub const DEFAULT_SUBSTEPS: usize = 1;
/// Sensor noise standard deviations, in state units.
pub const DEFAULT_MEASUREMENT_STD: [f64; MEASUREMENT_DIM] = [0.05, 0.05, 0.5, 0.5];
pub const DEFAULT_INITIAL_STD: [f64; STATE_DIM] = [0.1, 0.1, 1.0, 1.0];
/// Diagonal of the process noise covariance: `1e-4` scaled by the squared
/// ratio of temperature to concentration spread.
pub const DEFAULT_PROCESS_VARIANCE: [f64; STATE_DIM] = [1e-4, 1e-4, 1e-2, 1e-2];

pub type CstrRhs = fn(&StateVector, &InputVector, &ModelParameters, f64) -> StateVector;
pub type CstrMeasurement = fn(&StateVector) -> MeasurementVector;
pub type CstrTransition = Discretized<CstrRhs, ModelParameters>;
pub type CstrUkf = UkfFilter<CstrTransition, CstrMeasurement, STATE_DIM, INPUT_DIM, MEASUREMENT_DIM>;

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum SetupError {
    #[error(transparent)]
    Discretize(#[from] DiscretizeError),
    #[error(transparent)]
    Filter(#[from] FilterError),
}

/// Discrete CSTR model with zero-order hold on the input.
pub fn cstr_transition(
    params: ModelParameters,
    ts: f64,
    substeps: usize,
) -> Result<CstrTransition, DiscretizeError> {
    discretize(cstr_derivative as CstrRhs, params, ts, substeps)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CstrFilterConfig {
    pub params: ModelParameters,
    pub sample_time: f64,
    pub substeps: usize,
    pub initial_mean: StateVector,
    pub initial_std: [f64; STATE_DIM],
    pub process_variance: [f64; STATE_DIM],
    pub measurement_std: [f64; MEASUREMENT_DIM],
    pub ut: UtConfig,
}

impl Default for CstrFilterConfig {
    fn default() -> Self {
        Self {
            params: cstr_default_parameters(),
            sample_time: DEFAULT_SAMPLE_TIME,
            substeps: DEFAULT_SUBSTEPS,
            initial_mean: steady_state(),
            initial_std: DEFAULT_INITIAL_STD,
            process_variance: DEFAULT_PROCESS_VARIANCE,
            measurement_std: DEFAULT_MEASUREMENT_STD,
            ut: UtConfig::default(),
        }
    }
}

fn diag<const N: usize>(v: [f64; N]) -> SMatrix<f64, N, N> {
    SMatrix::from_diagonal(&SVector::from(v))
}

fn squared<const N: usize>(v: [f64; N]) -> [f64; N] {
    v.map(|s| s * s)
}

pub fn build_cstr_filter(cfg: &CstrFilterConfig) -> Result<CstrUkf, SetupError> {
    let dynamics = cstr_transition(cfg.params, cfg.sample_time, cfg.substeps)?;
    let initial = GaussianBelief::new(cfg.initial_mean, diag(squared(cfg.initial_std)));
    Ok(UkfFilter::new(
        dynamics,
        cstr_measurement as CstrMeasurement,
        diag(cfg.process_variance),
        diag(squared(cfg.measurement_std)),
        cfg.ut,
        initial,
    )?)
}
