//! Synthetic CSTR data: seeded input excitation, noise-free integration and
//! additive Gaussian sensor noise.
//!
//! The generator is SplitMix64 (64-bit state). For sample `k`, if
//! `k % block_len == 0` two uniforms are drawn, first the feed-rate factor and
//! then the cooling-power factor; then four standard normals are drawn for
//! the sensor noise of channels 0..4. The draw order is part of the file
//! format contract: it fixes the bytes written for a given seed.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rand_xoshiro::SplitMix64;

use crate::dynamics::{
    cstr_default_parameters, cstr_measurement, nominal_input, steady_state, InputVector,
    MeasurementVector, ModelParameters, StateVector,
};
use crate::estimator::{
    cstr_transition, DEFAULT_MEASUREMENT_STD, DEFAULT_SAMPLE_TIME, DEFAULT_SUBSTEPS,
};
use crate::integrator::DiscretizeError;
use crate::trajectory::{
    write_records, TrajectoryError, INPUT_FILE, MEASUREMENT_FILE, TRUTH_FILE,
};

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub samples: usize,
    pub seed: u64,
    pub sample_time: f64,
    pub substeps: usize,
    pub measurement_std: [f64; 4],
    /// Inputs are redrawn every `block_len` samples.
    pub block_len: usize,
    /// Multiplicative range around the nominal feed rate.
    pub feed_range: (f64, f64),
    /// Multiplicative range around the nominal cooling power.
    pub cooling_range: (f64, f64),
    pub params: ModelParameters,
    pub initial_state: StateVector,
    pub nominal_input: InputVector,
}

impl SimulationConfig {
    pub fn new(samples: usize, seed: u64) -> Self {
        Self {
            samples,
            seed,
            sample_time: DEFAULT_SAMPLE_TIME,
            substeps: DEFAULT_SUBSTEPS,
            measurement_std: DEFAULT_MEASUREMENT_STD,
            block_len: 50,
            feed_range: (0.85, 1.15),
            cooling_range: (0.9, 1.1),
            params: cstr_default_parameters(),
            initial_state: steady_state(),
            nominal_input: nominal_input(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimulatedData {
    pub inputs: Vec<InputVector>,
    pub measurements: Vec<MeasurementVector>,
    /// True state at each sample, before noise.
    pub states: Vec<StateVector>,
}

/// Runs the simulation. Sample `k` pairs state `x[k]`, the input `u[k]` held
/// over `[t_k, t_k + Ts)` and the measurement `y[k] = x[k] + noise`.
pub fn simulate(cfg: &SimulationConfig) -> Result<SimulatedData, DiscretizeError> {
    let model = cstr_transition(cfg.params, cfg.sample_time, cfg.substeps)?;
    let block_len = cfg.block_len.max(1);
    let mut rng = SplitMix64::seed_from_u64(cfg.seed);
    let mut out = SimulatedData {
        inputs: Vec::with_capacity(cfg.samples),
        measurements: Vec::with_capacity(cfg.samples),
        states: Vec::with_capacity(cfg.samples),
    };
    let mut x = cfg.initial_state;
    let mut u = cfg.nominal_input;
    let mut t = 0.0;
    for k in 0..cfg.samples {
        if k % block_len == 0 {
            let feed: f64 = rng.random_range(cfg.feed_range.0..cfg.feed_range.1);
            let cooling: f64 = rng.random_range(cfg.cooling_range.0..cfg.cooling_range.1);
            u = InputVector::new(cfg.nominal_input[0] * feed, cfg.nominal_input[1] * cooling);
        }
        let noise = MeasurementVector::from_fn(|i, _| {
            let z: f64 = rng.sample(StandardNormal);
            cfg.measurement_std[i] * z
        });
        out.states.push(x);
        out.inputs.push(u);
        out.measurements.push(cstr_measurement(&x) + noise);
        x = model.step(&x, &u, t);
        t += cfg.sample_time;
    }
    Ok(out)
}

/// Writes `data_u.bin`, `data_y.bin` and `data_x.bin` into `dir`, creating it
/// if needed.
pub fn write_simulation(data: &SimulatedData, dir: impl AsRef<Path>) -> Result<(), TrajectoryError> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|source| TrajectoryError::File {
        path: dir.to_path_buf(),
        source,
    })?;
    write_records(dir.join(INPUT_FILE), &data.inputs)?;
    write_records(dir.join(MEASUREMENT_FILE), &data.measurements)?;
    write_records(dir.join(TRUTH_FILE), &data.states)
}
