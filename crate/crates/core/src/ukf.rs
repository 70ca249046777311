//! Unscented Kalman filter with additive process and measurement noise.
//!
//! All storage is fixed-size (`nalgebra` static matrices), so `predict` and
//! `correct` never touch the heap once the filter is built. The symmetric
//! sigma-point set is kept as a centre point plus two `n x n` matrices whose
//! columns are the `+` and `-` points, which sidesteps the `2n + 1` const
//! generic that stable Rust cannot express.

use std::f64::consts::PI;

use nalgebra::{Cholesky, SMatrix, SVector};
use thiserror::Error;

use crate::integrator::DiscreteTransition;

/// Cholesky retries add these multiples of the identity before giving up.
pub const CHOLESKY_JITTER: [f64; 3] = [1e-12, 1e-10, 1e-8];

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum FilterError {
    #[error("covariance is not positive semi-definite{}", at_step(*.step))]
    CholeskyFailure { step: Option<usize> },
    #[error("innovation covariance is singular{}", at_step(*.step))]
    SingularInnovation { step: Option<usize> },
    #[error("Data-length mismatch: {inputs} inputs, {measurements} measurements")]
    LengthMismatch { inputs: usize, measurements: usize },
    #[error("invalid filter configuration: {0}")]
    InvalidConfig(&'static str),
}

fn at_step(step: Option<usize>) -> String {
    step.map(|k| format!(" at step {k}")).unwrap_or_default()
}

impl FilterError {
    fn at(self, k: usize) -> Self {
        match self {
            Self::CholeskyFailure { .. } => Self::CholeskyFailure { step: Some(k) },
            Self::SingularInnovation { .. } => Self::SingularInnovation { step: Some(k) },
            other => other,
        }
    }
}

/// Scaling of the unscented transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UtConfig {
    pub alpha: f64,
    pub beta: f64,
    pub kappa: f64,
}

impl Default for UtConfig {
    /// `alpha = 1, beta = 0, kappa = 0`: zero centre weight and equal
    /// non-negative weights on the remaining `2n` points.
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 0.0,
            kappa: 0.0,
        }
    }
}

impl UtConfig {
    pub fn lambda(&self, n: usize) -> f64 {
        let n = n as f64;
        self.alpha * self.alpha * (n + self.kappa) - n
    }

    pub fn validate(&self, n: usize) -> Result<(), FilterError> {
        if !(self.alpha.is_finite() && self.beta.is_finite() && self.kappa.is_finite()) {
            return Err(FilterError::InvalidConfig("non-finite UT parameter"));
        }
        if self.alpha <= 0.0 {
            return Err(FilterError::InvalidConfig("alpha must be positive"));
        }
        if n as f64 + self.lambda(n) <= 0.0 {
            return Err(FilterError::InvalidConfig("n + lambda must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianBelief<const N: usize> {
    pub mean: SVector<f64, N>,
    pub cov: SMatrix<f64, N, N>,
}

impl<const N: usize> GaussianBelief<N> {
    pub fn new(mean: SVector<f64, N>, cov: SMatrix<f64, N, N>) -> Self {
        Self { mean, cov }
    }

    /// Largest `|cov[i,j] - cov[j,i]|`.
    pub fn asymmetry(&self) -> f64 {
        (self.cov - self.cov.transpose()).amax()
    }
}

/// The `2n + 1` sigma points of a belief and their weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaPointSet<const N: usize> {
    pub center: SVector<f64, N>,
    /// Column `i` is `mean + L[:, i]`.
    pub plus: SMatrix<f64, N, N>,
    /// Column `i` is `mean - L[:, i]`.
    pub minus: SMatrix<f64, N, N>,
    pub wm_center: f64,
    pub wc_center: f64,
    /// Shared mean and covariance weight of the `2n` outer points.
    pub w_outer: f64,
}

impl<const N: usize> SigmaPointSet<N> {
    pub const fn len(&self) -> usize {
        2 * N + 1
    }

    pub const fn is_empty(&self) -> bool {
        false
    }

    /// Point `i` in the order `centre, plus_1..plus_n, minus_1..minus_n`.
    pub fn point(&self, i: usize) -> SVector<f64, N> {
        assert!(i <= 2 * N, "sigma point index {i} out of range");
        match i {
            0 => self.center,
            i if i <= N => self.plus.column(i - 1).into_owned(),
            i => self.minus.column(i - 1 - N).into_owned(),
        }
    }

    pub fn mean_weight(&self, i: usize) -> f64 {
        if i == 0 {
            self.wm_center
        } else {
            self.w_outer
        }
    }

    pub fn cov_weight(&self, i: usize) -> f64 {
        if i == 0 {
            self.wc_center
        } else {
            self.w_outer
        }
    }

    /// Pushes every point through `g`.
    pub fn map<const M: usize>(
        &self,
        mut g: impl FnMut(&SVector<f64, N>) -> SVector<f64, M>,
    ) -> MappedPoints<M, N> {
        let mut plus = SMatrix::<f64, M, N>::zeros();
        let mut minus = SMatrix::<f64, M, N>::zeros();
        for i in 0..N {
            plus.set_column(i, &g(&self.plus.column(i).into_owned()));
            minus.set_column(i, &g(&self.minus.column(i).into_owned()));
        }
        MappedPoints {
            center: g(&self.center),
            plus,
            minus,
        }
    }

    fn as_mapped(&self) -> MappedPoints<N, N> {
        MappedPoints {
            center: self.center,
            plus: self.plus,
            minus: self.minus,
        }
    }

    pub fn weighted_mean(&self) -> SVector<f64, N> {
        self.as_mapped().weighted_mean(self)
    }

    pub fn weighted_cov(&self, mean: &SVector<f64, N>) -> SMatrix<f64, N, N> {
        let pts = self.as_mapped();
        pts.cross_cov(&pts, mean, mean, self)
    }
}

/// Images of a sigma-point set under a map into an `M`-dimensional space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MappedPoints<const M: usize, const N: usize> {
    pub center: SVector<f64, M>,
    pub plus: SMatrix<f64, M, N>,
    pub minus: SMatrix<f64, M, N>,
}

impl<const M: usize, const N: usize> MappedPoints<M, N> {
    pub fn weighted_mean(&self, sp: &SigmaPointSet<N>) -> SVector<f64, M> {
        let mut outer = SVector::<f64, M>::zeros();
        for i in 0..N {
            outer += self.plus.column(i) + self.minus.column(i);
        }
        self.center * sp.wm_center + outer * sp.w_outer
    }

    /// `sum_i Wc_i (a_i - a_mean)(b_i - b_mean)^T`.
    pub fn cross_cov<const K: usize>(
        &self,
        other: &MappedPoints<K, N>,
        mean: &SVector<f64, M>,
        other_mean: &SVector<f64, K>,
        sp: &SigmaPointSet<N>,
    ) -> SMatrix<f64, M, K> {
        let mut dp = self.plus;
        let mut dm = self.minus;
        let mut op = other.plus;
        let mut om = other.minus;
        for i in 0..N {
            dp.set_column(i, &(self.plus.column(i) - mean));
            dm.set_column(i, &(self.minus.column(i) - mean));
            op.set_column(i, &(other.plus.column(i) - other_mean));
            om.set_column(i, &(other.minus.column(i) - other_mean));
        }
        let d0 = self.center - mean;
        let o0 = other.center - other_mean;
        (dp * op.transpose() + dm * om.transpose()) * sp.w_outer
            + d0 * o0.transpose() * sp.wc_center
    }
}

fn symmetrize<const N: usize>(m: &mut SMatrix<f64, N, N>) {
    for i in 0..N {
        for j in (i + 1)..N {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
}

/// Lower Cholesky factor of `scale * (cov + eps I)`, trying `eps = 0` first and
/// then each entry of [`CHOLESKY_JITTER`].
fn jittered_cholesky<const N: usize>(
    cov: &SMatrix<f64, N, N>,
    scale: f64,
) -> Option<SMatrix<f64, N, N>> {
    std::iter::once(0.0)
        .chain(CHOLESKY_JITTER)
        .find_map(|eps| {
            let m = (cov + SMatrix::<f64, N, N>::identity() * eps) * scale;
            Cholesky::new(m).map(|c| c.l())
        })
}

/// Merwe-scaled symmetric sigma points of `belief`.
pub fn sigma_points<const N: usize>(
    belief: &GaussianBelief<N>,
    cfg: &UtConfig,
) -> Result<SigmaPointSet<N>, FilterError> {
    cfg.validate(N)?;
    let n = N as f64;
    let lambda = cfg.lambda(N);
    let spread = n + lambda;
    let l = jittered_cholesky(&belief.cov, spread)
        .ok_or(FilterError::CholeskyFailure { step: None })?;
    let mut plus = l;
    let mut minus = l;
    for i in 0..N {
        plus.set_column(i, &(belief.mean + l.column(i)));
        minus.set_column(i, &(belief.mean - l.column(i)));
    }
    let wm_center = lambda / spread;
    Ok(SigmaPointSet {
        center: belief.mean,
        plus,
        minus,
        wm_center,
        wc_center: wm_center + (1.0 - cfg.alpha * cfg.alpha + cfg.beta),
        w_outer: 1.0 / (2.0 * spread),
    })
}

/// Filtered and predicted beliefs along a trajectory plus the total
/// log-likelihood of the measurements.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterSolution<const N: usize> {
    /// Belief after incorporating measurement `k`.
    pub filtered: Vec<GaussianBelief<N>>,
    /// Belief before incorporating measurement `k`.
    pub predicted: Vec<GaussianBelief<N>>,
    /// Log predictive density of each measurement.
    pub loglik_steps: Vec<f64>,
    pub ll: f64,
}

impl<const N: usize> FilterSolution<N> {
    pub fn len(&self) -> usize {
        self.filtered.len()
    }

    pub fn is_empty(&self) -> bool {
        self.filtered.is_empty()
    }
}

/// Unscented Kalman filter over a discrete transition `D` and a measurement
/// map `H: Fn(&x) -> y`.
#[derive(Debug, Clone)]
pub struct UkfFilter<D, H, const NX: usize, const NU: usize, const NY: usize> {
    dynamics: D,
    measurement: H,
    process_noise: SMatrix<f64, NX, NX>,
    measurement_noise: SMatrix<f64, NY, NY>,
    ut: UtConfig,
    belief: GaussianBelief<NX>,
    time: f64,
}

fn is_symmetric<const N: usize>(m: &SMatrix<f64, N, N>) -> bool {
    let scale = m.amax().max(1.0);
    (m - m.transpose()).amax() <= 1e-12 * scale
}

impl<D, H, const NX: usize, const NU: usize, const NY: usize> UkfFilter<D, H, NX, NU, NY>
where
    D: DiscreteTransition<NX, NU>,
    H: Fn(&SVector<f64, NX>) -> SVector<f64, NY>,
{
    pub fn new(
        dynamics: D,
        measurement: H,
        process_noise: SMatrix<f64, NX, NX>,
        measurement_noise: SMatrix<f64, NY, NY>,
        ut: UtConfig,
        initial: GaussianBelief<NX>,
    ) -> Result<Self, FilterError> {
        ut.validate(NX)?;
        if !is_symmetric(&process_noise) || process_noise.diagonal().iter().any(|&d| d < 0.0) {
            return Err(FilterError::InvalidConfig(
                "process noise must be symmetric positive semi-definite",
            ));
        }
        if !is_symmetric(&measurement_noise) || Cholesky::new(measurement_noise).is_none() {
            return Err(FilterError::InvalidConfig(
                "measurement noise must be symmetric positive definite",
            ));
        }
        if !is_symmetric(&initial.cov) {
            return Err(FilterError::InvalidConfig("initial covariance must be symmetric"));
        }
        Ok(Self {
            dynamics,
            measurement,
            process_noise,
            measurement_noise,
            ut,
            belief: initial,
            time: 0.0,
        })
    }

    pub fn belief(&self) -> &GaussianBelief<NX> {
        &self.belief
    }

    pub fn set_belief(&mut self, belief: GaussianBelief<NX>) {
        self.belief = belief;
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn set_time(&mut self, t: f64) {
        self.time = t;
    }

    pub fn dynamics(&self) -> &D {
        &self.dynamics
    }

    pub fn ut_config(&self) -> &UtConfig {
        &self.ut
    }

    /// Time update: propagates the belief one sample through the dynamics.
    pub fn predict(&mut self, u: &SVector<f64, NU>) -> Result<(), FilterError> {
        let sp = sigma_points(&self.belief, &self.ut)?;
        let t = self.time;
        let propagated = sp.map(|x| self.dynamics.transition(x, u, t));
        let mean = propagated.weighted_mean(&sp);
        let mut cov = propagated.cross_cov(&propagated, &mean, &mean, &sp) + self.process_noise;
        symmetrize(&mut cov);
        self.belief = GaussianBelief { mean, cov };
        self.time += self.dynamics.sample_time();
        Ok(())
    }

    /// Measurement update with `y`. Returns the log predictive density of `y`.
    pub fn correct(
        &mut self,
        _u: &SVector<f64, NU>,
        y: &SVector<f64, NY>,
    ) -> Result<f64, FilterError> {
        let sp = sigma_points(&self.belief, &self.ut)?;
        let predicted_y = sp.map(&self.measurement);
        let y_hat = predicted_y.weighted_mean(&sp);
        let mut s = predicted_y.cross_cov(&predicted_y, &y_hat, &y_hat, &sp)
            + self.measurement_noise;
        symmetrize(&mut s);
        let cross = sp
            .as_mapped()
            .cross_cov(&predicted_y, &self.belief.mean, &y_hat, &sp);

        let chol = Cholesky::new(s).ok_or(FilterError::SingularInnovation { step: None })?;
        let innovation = y - y_hat;
        // K = C S^-1, computed as (S^-1 C^T)^T since S is symmetric.
        let gain = chol.solve(&cross.transpose()).transpose();
        let whitened = chol.solve(&innovation);
        let mahalanobis = innovation.dot(&whitened);
        let logdet = 2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>();

        self.belief.mean += gain * innovation;
        self.belief.cov -= gain * s * gain.transpose();
        symmetrize(&mut self.belief.cov);

        Ok(-0.5 * (mahalanobis + logdet + NY as f64 * (2.0 * PI).ln()))
    }

    /// Filters a whole trajectory: at every step, correct with `ys[k]` and then
    /// predict with `us[k]`. The belief held on entry is the prediction for the
    /// first measurement.
    pub fn forward_trajectory(
        &mut self,
        us: &[SVector<f64, NU>],
        ys: &[SVector<f64, NY>],
    ) -> Result<FilterSolution<NX>, FilterError> {
        if us.len() != ys.len() {
            return Err(FilterError::LengthMismatch {
                inputs: us.len(),
                measurements: ys.len(),
            });
        }
        let n = us.len();
        let mut sol = FilterSolution {
            filtered: Vec::with_capacity(n),
            predicted: Vec::with_capacity(n),
            loglik_steps: Vec::with_capacity(n),
            ll: 0.0,
        };
        for (k, (u, y)) in us.iter().zip(ys).enumerate() {
            sol.predicted.push(self.belief);
            let ll = self.correct(u, y).map_err(|e| e.at(k))?;
            sol.loglik_steps.push(ll);
            sol.ll += ll;
            sol.filtered.push(self.belief);
            self.predict(u).map_err(|e| e.at(k))?;
        }
        Ok(sol)
    }
}
