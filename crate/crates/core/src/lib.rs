//! Real-time model-based estimation and control.
//!
//! * [`dynamics`]: the CSTR model `dx/dt = f(x, u, p, t)`.
//! * [`integrator`]: fixed-step RK4 and zero-order-hold discretization.
//! * [`ukf`]: unscented Kalman filter with log-likelihood accumulation.
//! * [`estimator`]: the CSTR filter assembled from the pieces above.
//! * [`pid`]: discrete PID controller with bumpless parameter changes.
//! * [`trajectory`] and [`simulate`]: binary data files and synthetic data.
//!
//! Everything on the per-sample path (`rk4_step`, `UkfFilter::predict`,
//! `UkfFilter::correct`, `PidController::calculate_control`) works on
//! fixed-size values and performs no heap allocation.

pub mod dynamics;
pub mod estimator;
pub mod integrator;
pub mod pid;
pub mod simulate;
pub mod trajectory;
pub mod ukf;

pub use dynamics::{
    cstr_default_parameters, cstr_derivative, cstr_measurement, InputVector, MeasurementVector,
    ModelParameters, StateVector,
};
pub use estimator::{build_cstr_filter, CstrFilterConfig, CstrUkf};
pub use integrator::{discretize, rk4_step, DiscreteTransition, Discretized};
pub use pid::{PidController, PidError, PidParameters, PidState};
pub use trajectory::{read_trajectories, write_trajectories, TrajectoryError};
pub use ukf::{sigma_points, FilterError, FilterSolution, GaussianBelief, UkfFilter, UtConfig};
