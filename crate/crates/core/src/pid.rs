//! Discrete PID controller with setpoint weighting, filtered derivative on the
//! measurement, output saturation and tracking anti-windup.
//!
//! The update law per sample is
//!
//! ```text
//! P = K (b r - y)
//! D = ad D - bd (y - y_old)
//! v = P + I + D + uff
//! u = clamp(v, umin, umax)
//! I = I + bi (r - y) + br (u - v)
//! ```
//!
//! with `bi = K Ts / Ti`, `ad = Td / (Td + N Ts)`, `bd = K N ad` and
//! `br = Ts / Tt`. Parameter setters adjust the state so the output does not
//! jump (bumpless transfer).
//!
//! Nothing here allocates; a controller is a plain `Copy` value.

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum PidError {
    #[error("invalid parameter {name}: {requirement}")]
    InvalidParameter {
        name: &'static str,
        requirement: &'static str,
    },
}

fn invalid(name: &'static str, requirement: &'static str) -> PidError {
    PidError::InvalidParameter { name, requirement }
}

#[allow(non_snake_case)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PidParameters {
    /// Proportional gain.
    pub K: f64,
    /// Integral time; `f64::INFINITY` disables integral action.
    pub Ti: f64,
    /// Derivative time; 0 disables derivative action.
    pub Td: f64,
    /// Anti-windup tracking time; `f64::INFINITY` disables tracking.
    pub Tt: f64,
    /// Maximum derivative gain.
    pub N: f64,
    /// Setpoint weight in the proportional term.
    pub b: f64,
    pub umin: f64,
    pub umax: f64,
    /// Sample time.
    pub Ts: f64,
}

/// Tracking time heuristic: `Ti` without derivative action, `sqrt(Ti Td)` with it.
#[allow(non_snake_case)]
pub fn default_tracking_time(Ti: f64, Td: f64) -> f64 {
    if Ti.is_infinite() {
        f64::INFINITY
    } else if Td == 0.0 {
        Ti
    } else {
        (Ti * Td).sqrt()
    }
}

#[allow(non_snake_case)]
impl PidParameters {
    /// Unlimited output, `N = 10`, `b = 1` and the default tracking time.
    pub fn new(K: f64, Ti: f64, Td: f64, Ts: f64) -> Self {
        Self {
            K,
            Ti,
            Td,
            Tt: default_tracking_time(Ti, Td),
            N: 10.0,
            b: 1.0,
            umin: f64::NEG_INFINITY,
            umax: f64::INFINITY,
            Ts,
        }
    }

    /// `K = 1, Ti = 1, Td = 0, Ts = 1`.
    pub fn reference_defaults() -> Self {
        Self::new(1.0, 1.0, 0.0, 1.0)
    }

    pub fn with_limits(mut self, umin: f64, umax: f64) -> Self {
        self.umin = umin;
        self.umax = umax;
        self
    }

    pub fn with_tracking_time(mut self, Tt: f64) -> Self {
        self.Tt = Tt;
        self
    }

    pub fn with_setpoint_weight(mut self, b: f64) -> Self {
        self.b = b;
        self
    }

    pub fn with_derivative_gain_limit(mut self, N: f64) -> Self {
        self.N = N;
        self
    }

    pub fn validate(&self) -> Result<(), PidError> {
        if !(self.Ts.is_finite() && self.Ts > 0.0) {
            return Err(invalid("Ts", "must be positive and finite"));
        }
        if !self.K.is_finite() {
            return Err(invalid("K", "must be finite"));
        }
        check_ti(self.Ti)?;
        check_td(self.Td)?;
        if !(self.Tt > 0.0) {
            return Err(invalid("Tt", "must be positive or infinite"));
        }
        if !(self.N.is_finite() && self.N > 0.0) {
            return Err(invalid("N", "must be positive and finite"));
        }
        if !(0.0..=1.0).contains(&self.b) {
            return Err(invalid("b", "must lie in [0, 1]"));
        }
        if self.umin.is_nan() || self.umax.is_nan() || !(self.umin < self.umax) {
            return Err(invalid("umin/umax", "require umin < umax"));
        }
        Ok(())
    }
}

#[allow(non_snake_case)]
fn check_ti(Ti: f64) -> Result<(), PidError> {
    if Ti > 0.0 {
        Ok(())
    } else {
        Err(invalid("Ti", "must be positive or infinite"))
    }
}

#[allow(non_snake_case)]
fn check_td(Td: f64) -> Result<(), PidError> {
    if Td.is_finite() && Td >= 0.0 {
        Ok(())
    } else {
        Err(invalid("Td", "must be non-negative and finite"))
    }
}

/// Internal controller state.
#[allow(non_snake_case)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PidState {
    /// Integral term, in control units.
    pub I: f64,
    /// Filtered derivative term, in control units.
    pub D: f64,
    pub y_old: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Coefficients {
    bi: f64,
    ad: f64,
    bd: f64,
    br: f64,
}

impl Coefficients {
    fn from_params(p: &PidParameters) -> Self {
        let bi = if p.Ti.is_infinite() { 0.0 } else { p.K * p.Ts / p.Ti };
        let ad = p.Td / (p.Td + p.N * p.Ts);
        let br = if p.Tt.is_infinite() { 0.0 } else { p.Ts / p.Tt };
        Self {
            bi,
            ad,
            bd: p.K * p.N * ad,
            br,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PidController {
    params: PidParameters,
    coeffs: Coefficients,
    state: PidState,
}

#[allow(non_snake_case)]
impl PidController {
    pub fn new(params: PidParameters) -> Result<Self, PidError> {
        params.validate()?;
        Ok(Self {
            params,
            coeffs: Coefficients::from_params(&params),
            state: PidState::default(),
        })
    }

    pub fn params(&self) -> &PidParameters {
        &self.params
    }

    pub fn state(&self) -> &PidState {
        &self.state
    }

    /// Overwrites the internal state, e.g. to restore a snapshot.
    pub fn set_state(&mut self, state: PidState) {
        self.state = state;
    }

    /// Integral increment per unit error, `K Ts / Ti`.
    pub fn bi(&self) -> f64 {
        self.coeffs.bi
    }

    /// Derivative filter pole, `Td / (Td + N Ts)`.
    pub fn ad(&self) -> f64 {
        self.coeffs.ad
    }

    /// Derivative gain on measurement differences, `K N ad`.
    pub fn bd(&self) -> f64 {
        self.coeffs.bd
    }

    /// Tracking gain, `Ts / Tt`.
    pub fn br(&self) -> f64 {
        self.coeffs.br
    }

    /// Computes the control signal for setpoint `r`, measurement `y` and
    /// feedforward `uff`, then advances the state.
    #[inline]
    pub fn calculate_control(&mut self, r: f64, y: f64, uff: f64) -> f64 {
        let p = &self.params;
        let c = &self.coeffs;
        let s = &mut self.state;
        let proportional = p.K * (p.b * r - y);
        s.D = c.ad * s.D - c.bd * (y - s.y_old);
        let v = proportional + s.I + s.D + uff;
        let u = v.clamp(p.umin, p.umax);
        s.I += c.bi * (r - y) + c.br * (u - v);
        s.y_old = y;
        u
    }

    /// Changes the gain without a jump in `P + I` at the operating point `(r, y)`.
    pub fn set_K(&mut self, K: f64, r: f64, y: f64) -> Result<(), PidError> {
        if !K.is_finite() {
            return Err(invalid("K", "must be finite"));
        }
        self.state.I += (self.params.K - K) * (self.params.b * r - y);
        self.params.K = K;
        self.coeffs = Coefficients::from_params(&self.params);
        Ok(())
    }

    pub fn set_Ti(&mut self, Ti: f64) -> Result<(), PidError> {
        check_ti(Ti)?;
        self.params.Ti = Ti;
        self.coeffs = Coefficients::from_params(&self.params);
        Ok(())
    }

    pub fn set_Td(&mut self, Td: f64) -> Result<(), PidError> {
        check_td(Td)?;
        self.params.Td = Td;
        self.coeffs = Coefficients::from_params(&self.params);
        Ok(())
    }

    pub fn reset_state(&mut self) {
        self.state = PidState::default();
    }
}
