//! Test-only oracles, kept independent of the library's filter code.

#![allow(dead_code)]

use nalgebra::{SMatrix, SVector};
use rand::rngs::StdRng;
use rand::Rng;
use rand_distr::StandardNormal;
use rtmbe::integrator::DiscreteTransition;

pub const NX: usize = 4;
pub const NU: usize = 2;
pub const NY: usize = 3;

pub type Mat<const R: usize, const C: usize> = SMatrix<f64, R, C>;
pub type Vect<const R: usize> = SVector<f64, R>;

/// `x[k+1] = A x[k] + B u[k]`.
#[derive(Debug, Clone, Copy)]
pub struct LinearSystem {
    pub a: Mat<NX, NX>,
    pub b: Mat<NX, NU>,
}

impl DiscreteTransition<NX, NU> for LinearSystem {
    fn sample_time(&self) -> f64 {
        1.0
    }

    fn transition(&self, x: &Vect<NX>, u: &Vect<NU>, _t: f64) -> Vect<NX> {
        self.a * x + self.b * u
    }
}

#[derive(Debug, Clone)]
pub struct LinearGaussianProblem {
    pub system: LinearSystem,
    pub c: Mat<NY, NX>,
    pub q: Mat<NX, NX>,
    pub r: Mat<NY, NY>,
    pub x0: Vect<NX>,
    pub p0: Mat<NX, NX>,
    pub us: Vec<Vect<NU>>,
    pub ys: Vec<Vect<NY>>,
}

fn uniform<const R: usize, const C: usize>(rng: &mut StdRng, lo: f64, hi: f64) -> Mat<R, C> {
    Mat::<R, C>::from_fn(|_, _| rng.random_range(lo..hi))
}

fn normal<const R: usize>(rng: &mut StdRng) -> Vect<R> {
    Vect::<R>::from_fn(|_, _| rng.sample(StandardNormal))
}

/// Random stable system with random PSD noise and a simulated data record.
pub fn random_problem(rng: &mut StdRng, steps: usize) -> LinearGaussianProblem {
    let raw: Mat<NX, NX> = uniform(rng, -1.0, 1.0);
    let radius = raw.complex_eigenvalues().iter().map(|e| e.norm()).fold(0.0, f64::max);
    let a = raw * (0.95 / radius.max(1e-3));
    let b = uniform(rng, -1.0, 1.0);
    let c = uniform(rng, -1.0, 1.0);
    let mq: Mat<NX, NX> = uniform(rng, -0.3, 0.3);
    let q = mq * mq.transpose() + Mat::<NX, NX>::identity() * 1e-3;
    let mr: Mat<NY, NY> = uniform(rng, -0.5, 0.5);
    let r = mr * mr.transpose() + Mat::<NY, NY>::identity() * 0.05;
    let mp: Mat<NX, NX> = uniform(rng, -1.0, 1.0);
    let p0 = mp * mp.transpose() + Mat::<NX, NX>::identity() * 0.1;
    let x0 = uniform(rng, -2.0, 2.0);

    let lq = q.cholesky().unwrap().l();
    let lr = r.cholesky().unwrap().l();
    let lp = p0.cholesky().unwrap().l();
    let mut x = x0 + lp * normal::<NX>(rng);
    let mut us = Vec::with_capacity(steps);
    let mut ys = Vec::with_capacity(steps);
    for _ in 0..steps {
        let u: Vect<NU> = uniform(rng, -1.0, 1.0);
        ys.push(c * x + lr * normal::<NY>(rng));
        us.push(u);
        x = a * x + b * u + lq * normal::<NX>(rng);
    }
    LinearGaussianProblem {
        system: LinearSystem { a, b },
        c,
        q,
        r,
        x0,
        p0,
        us,
        ys,
    }
}

#[derive(Debug, Clone)]
pub struct KalmanRun {
    pub filtered_means: Vec<Vect<NX>>,
    pub filtered_covs: Vec<Mat<NX, NX>>,
    pub predicted_means: Vec<Vect<NX>>,
    pub predicted_covs: Vec<Mat<NX, NX>>,
    pub ll: f64,
}

/// Textbook Kalman filter: explicit inverse, Joseph-form covariance update,
/// determinant-based likelihood. Corrects with `y[k]` before predicting with
/// `u[k]`.
pub fn exact_kalman(p: &LinearGaussianProblem) -> KalmanRun {
    let mut x = p.x0;
    let mut cov = p.p0;
    let mut out = KalmanRun {
        filtered_means: vec![],
        filtered_covs: vec![],
        predicted_means: vec![],
        predicted_covs: vec![],
        ll: 0.0,
    };
    let a = p.system.a;
    let identity = Mat::<NX, NX>::identity();
    for (u, y) in p.us.iter().zip(&p.ys) {
        out.predicted_means.push(x);
        out.predicted_covs.push(cov);

        let s = p.c * cov * p.c.transpose() + p.r;
        let s_inv = s.try_inverse().expect("invertible innovation covariance");
        let gain = cov * p.c.transpose() * s_inv;
        let innovation = y - p.c * x;
        x += gain * innovation;
        let joseph = identity - gain * p.c;
        cov = joseph * cov * joseph.transpose() + gain * p.r * gain.transpose();
        out.ll += -0.5
            * ((innovation.transpose() * s_inv * innovation)[(0, 0)]
                + s.determinant().ln()
                + NY as f64 * (2.0 * std::f64::consts::PI).ln());

        out.filtered_means.push(x);
        out.filtered_covs.push(cov);

        x = a * x + p.system.b * u;
        cov = a * cov * a.transpose() + p.q;
    }
    out
}

/// `||a - b|| / max(||b||, tiny)` in the Frobenius norm.
pub fn rel_err<const R: usize, const C: usize>(a: &Mat<R, C>, b: &Mat<R, C>) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}
