//! Continuous-time CSTR model `dx/dt = f(x, u, p, t)` and its measurement map.
//!
//! State is `(cA, cB, TR, TK)`: reactant and product concentrations in mol/L,
//! reactor and coolant-jacket temperatures in °C. Input is `(F, Qdot)`: the
//! dilution rate in 1/h and the jacket cooling power in kJ/h. Time is in hours.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nalgebra::SVector;
use thiserror::Error;

pub const STATE_DIM: usize = 4;
pub const INPUT_DIM: usize = 2;
pub const MEASUREMENT_DIM: usize = 4;

pub type StateVector = SVector<f64, STATE_DIM>;
pub type InputVector = SVector<f64, INPUT_DIM>;
pub type MeasurementVector = SVector<f64, MEASUREMENT_DIM>;

const KELVIN_OFFSET: f64 = 273.15;

const DEFAULT_CONFIG: &str = include_str!("../config/cstr_default.conf");

/// Nominal operating input `(F, Qdot)` for the default parameter set.
pub const NOMINAL_INPUT: [f64; INPUT_DIM] = [18.83, -4495.7];

/// Steady state of the default model under [`NOMINAL_INPUT`].
///
/// Frozen fixture; `tests/dynamics.rs` recomputes it with a damped Newton
/// solve and checks the residual.
pub const STEADY_STATE: [f64; STATE_DIM] = [
    1.234406235673418,
    0.899823661982983,
    134.14895700093618,
    128.96288741806427,
];

pub fn nominal_input() -> InputVector {
    InputVector::from(NOMINAL_INPUT)
}

pub fn steady_state() -> StateVector {
    StateVector::from(STEADY_STATE)
}

#[derive(Debug, Error, PartialEq)]
pub enum ParamError {
    #[error("line {line}: expected `name = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown parameter `{name}`")]
    UnknownKey { line: usize, name: String },
    #[error("line {line}: parameter `{name}` given twice")]
    Duplicate { line: usize, name: String },
    #[error("line {line}: cannot parse value for `{name}`")]
    BadValue { line: usize, name: String },
    #[error("missing parameter `{0}`")]
    Missing(&'static str),
    #[error("parameter `{name}` must be {requirement}, got {value}")]
    Invalid {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error("cannot read parameter file: {0}")]
    Io(String),
}

/// Physical constants of the reactor.
#[allow(non_snake_case)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParameters {
    pub k10: f64,
    pub k20: f64,
    pub k30: f64,
    pub E1: f64,
    pub E2: f64,
    pub E3: f64,
    pub dH1: f64,
    pub dH2: f64,
    pub dH3: f64,
    pub rho: f64,
    pub Cp: f64,
    pub kwAR: f64,
    pub VR: f64,
    pub mK: f64,
    pub CpK: f64,
    pub cA0: f64,
    pub Tin: f64,
}

// Field order matches the struct and the config file.
const FIELD_NAMES: [&str; 17] = [
    "k10", "k20", "k30", "E1", "E2", "E3", "dH1", "dH2", "dH3", "rho", "Cp", "kwAR", "VR", "mK",
    "CpK", "cA0", "Tin",
];

// Fields whose values must be strictly positive.
const POSITIVE_FIELDS: [&str; 11] = [
    "k10", "k20", "k30", "rho", "Cp", "kwAR", "VR", "mK", "CpK", "cA0", "Tin",
];

impl ModelParameters {
    fn to_array(self) -> [f64; 17] {
        [
            self.k10, self.k20, self.k30, self.E1, self.E2, self.E3, self.dH1, self.dH2,
            self.dH3, self.rho, self.Cp, self.kwAR, self.VR, self.mK, self.CpK, self.cA0,
            self.Tin,
        ]
    }

    fn from_array(v: [f64; 17]) -> Self {
        Self {
            k10: v[0],
            k20: v[1],
            k30: v[2],
            E1: v[3],
            E2: v[4],
            E3: v[5],
            dH1: v[6],
            dH2: v[7],
            dH3: v[8],
            rho: v[9],
            Cp: v[10],
            kwAR: v[11],
            VR: v[12],
            mK: v[13],
            CpK: v[14],
            cA0: v[15],
            Tin: v[16],
        }
    }

    /// Checks finiteness of every field and positivity where required.
    ///
    /// `Tin` is in °C and is only required to be above absolute zero.
    pub fn validate(&self) -> Result<(), ParamError> {
        for (name, value) in FIELD_NAMES.iter().zip(self.to_array()) {
            if !value.is_finite() {
                return Err(ParamError::Invalid {
                    name,
                    requirement: "finite",
                    value,
                });
            }
            if *name == "Tin" {
                if value + KELVIN_OFFSET <= 0.0 {
                    return Err(ParamError::Invalid {
                        name,
                        requirement: "above absolute zero",
                        value,
                    });
                }
            } else if POSITIVE_FIELDS.contains(name) && value <= 0.0 {
                return Err(ParamError::Invalid {
                    name,
                    requirement: "positive",
                    value,
                });
            }
        }
        Ok(())
    }

    /// Like [`FromStr`], but permits zero rate and heat-exchange coefficients
    /// (used to switch reaction terms off).
    pub fn parse_unchecked(text: &str) -> Result<Self, ParamError> {
        let mut values = [None::<f64>; 17];
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or(ParamError::Syntax { line })?;
            let key = key.trim();
            let slot = FIELD_NAMES
                .iter()
                .position(|n| *n == key)
                .ok_or_else(|| ParamError::UnknownKey {
                    line,
                    name: key.to_string(),
                })?;
            if values[slot].is_some() {
                return Err(ParamError::Duplicate {
                    line,
                    name: key.to_string(),
                });
            }
            let parsed = value
                .trim()
                .parse::<f64>()
                .map_err(|_| ParamError::BadValue {
                    line,
                    name: key.to_string(),
                })?;
            values[slot] = Some(parsed);
        }
        let mut out = [0.0; 17];
        for (i, v) in values.iter().enumerate() {
            out[i] = v.ok_or(ParamError::Missing(FIELD_NAMES[i]))?;
        }
        Ok(Self::from_array(out))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ParamError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| ParamError::Io(e.to_string()))?;
        text.parse()
    }
}

impl FromStr for ModelParameters {
    type Err = ParamError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let p = Self::parse_unchecked(s)?;
        p.validate()?;
        Ok(p)
    }
}

/// Writes the config-file form, which parses back to an identical value.
impl fmt::Display for ModelParameters {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, value) in FIELD_NAMES.iter().zip(self.to_array()) {
            writeln!(f, "{name} = {value:?}")?;
        }
        Ok(())
    }
}

/// The committed default parameter set (`config/cstr_default.conf`).
pub fn cstr_default_parameters() -> ModelParameters {
    DEFAULT_CONFIG
        .parse()
        .expect("bundled CSTR config is valid")
}

/// Right-hand side of the CSTR ODE. Time-invariant; `_t` is accepted so the
/// signature fits the generic integrator.
#[allow(non_snake_case)]
pub fn cstr_derivative(
    x: &StateVector,
    u: &InputVector,
    p: &ModelParameters,
    _t: f64,
) -> StateVector {
    let (cA, cB, TR, TK) = (x[0], x[1], x[2], x[3]);
    let (F, Qdot) = (u[0], u[1]);
    let abs_temp = TR + KELVIN_OFFSET;
    let k1 = p.k10 * (p.E1 / abs_temp).exp();
    let k2 = p.k20 * (p.E2 / abs_temp).exp();
    let k3 = p.k30 * (p.E3 / abs_temp).exp();

    let r1 = k1 * cA;
    let r2 = k2 * cB;
    let r3 = k3 * cA * cA;

    let dcA = F * (p.cA0 - cA) - r1 - r3;
    let dcB = -F * cB + r1 - r2;
    let dTR = F * (p.Tin - TR) + p.kwAR / (p.rho * p.Cp * p.VR) * (TK - TR)
        - (r1 * p.dH1 + r2 * p.dH2 + r3 * p.dH3) / (p.rho * p.Cp);
    let dTK = (Qdot + p.kwAR * (TR - TK)) / (p.mK * p.CpK);
    StateVector::new(dcA, dcB, dTR, dTK)
}

/// All four states are measured directly.
pub fn cstr_measurement(x: &StateVector) -> MeasurementVector {
    *x
}
