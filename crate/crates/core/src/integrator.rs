//! Fixed-step classical Runge-Kutta 4 and zero-order-hold discretization.

use nalgebra::SVector;

/// One classical RK4 step of size `h`, holding `u` constant over the step.
pub fn rk4_step<F, P, const NX: usize, const NU: usize>(
    f: &F,
    x: &SVector<f64, NX>,
    u: &SVector<f64, NU>,
    p: &P,
    t: f64,
    h: f64,
) -> SVector<f64, NX>
where
    F: Fn(&SVector<f64, NX>, &SVector<f64, NU>, &P, f64) -> SVector<f64, NX>,
{
    let half = 0.5 * h;
    let k1 = f(x, u, p, t);
    let k2 = f(&(x + k1 * half), u, p, t + half);
    let k3 = f(&(x + k2 * half), u, p, t + half);
    let k4 = f(&(x + k3 * h), u, p, t + h);
    x + (k1 + (k2 + k3) * 2.0 + k4) * (h / 6.0)
}

/// A discrete-time state transition `x[k+1] = g(x[k], u[k], t[k])` with a fixed
/// sample time.
pub trait DiscreteTransition<const NX: usize, const NU: usize> {
    fn sample_time(&self) -> f64;

    fn transition(&self, x: &SVector<f64, NX>, u: &SVector<f64, NU>, t: f64)
        -> SVector<f64, NX>;
}

/// Continuous dynamics discretized by `substeps` RK4 steps per sample.
#[derive(Debug, Clone)]
pub struct Discretized<F, P> {
    f: F,
    params: P,
    sample_time: f64,
    substeps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum DiscretizeError {
    #[error("sample time must be positive and finite, got {0}")]
    SampleTime(f64),
    #[error("substep count must be at least 1")]
    Substeps,
}

/// Builds the zero-order-hold discrete map of `f` with sample time `ts`.
pub fn discretize<F, P>(
    f: F,
    params: P,
    ts: f64,
    substeps: usize,
) -> Result<Discretized<F, P>, DiscretizeError> {
    if !(ts.is_finite() && ts > 0.0) {
        return Err(DiscretizeError::SampleTime(ts));
    }
    if substeps == 0 {
        return Err(DiscretizeError::Substeps);
    }
    Ok(Discretized {
        f,
        params,
        sample_time: ts,
        substeps,
    })
}

impl<F, P> Discretized<F, P> {
    pub fn substeps(&self) -> usize {
        self.substeps
    }

    pub fn params(&self) -> &P {
        &self.params
    }

    pub fn sample_time(&self) -> f64 {
        self.sample_time
    }

    pub fn step<const NX: usize, const NU: usize>(
        &self,
        x: &SVector<f64, NX>,
        u: &SVector<f64, NU>,
        t: f64,
    ) -> SVector<f64, NX>
    where
        F: Fn(&SVector<f64, NX>, &SVector<f64, NU>, &P, f64) -> SVector<f64, NX>,
    {
        let h = self.sample_time / self.substeps as f64;
        let mut state = *x;
        let mut time = t;
        for _ in 0..self.substeps {
            state = rk4_step(&self.f, &state, u, &self.params, time, h);
            time += h;
        }
        state
    }
}

impl<F, P, const NX: usize, const NU: usize> DiscreteTransition<NX, NU> for Discretized<F, P>
where
    F: Fn(&SVector<f64, NX>, &SVector<f64, NU>, &P, f64) -> SVector<f64, NX>,
{
    fn sample_time(&self) -> f64 {
        self.sample_time
    }

    fn transition(
        &self,
        x: &SVector<f64, NX>,
        u: &SVector<f64, NU>,
        t: f64,
    ) -> SVector<f64, NX> {
        self.step(x, u, t)
    }
}
