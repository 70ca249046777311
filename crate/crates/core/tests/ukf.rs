//! Filter-level properties of the UKF.

mod common;

use common::*;
use nalgebra::{Matrix4, Vector4};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;
use rtmbe::estimator::{build_cstr_filter, CstrFilterConfig};
use rtmbe::simulate::{simulate, SimulationConfig};
use rtmbe::ukf::{sigma_points, GaussianBelief, UkfFilter, UtConfig};

type LinearUkf = UkfFilter<LinearSystem, Box<dyn Fn(&Vect<NX>) -> Vect<NY>>, NX, NU, NY>;

fn filter_for(p: &LinearGaussianProblem) -> LinearUkf {
    let c = p.c;
    UkfFilter::new(
        p.system,
        Box::new(move |x: &Vect<NX>| c * x) as Box<dyn Fn(&Vect<NX>) -> Vect<NY>>,
        p.q,
        p.r,
        UtConfig::default(),
        GaussianBelief::new(p.x0, p.p0),
    )
    .unwrap()
}

#[test]
fn matches_exact_kalman_filter_on_linear_systems() {
    let mut rng = StdRng::seed_from_u64(11);
    for _ in 0..20 {
        let problem = random_problem(&mut rng, 60);
        let oracle = exact_kalman(&problem);
        let sol = filter_for(&problem)
            .forward_trajectory(&problem.us, &problem.ys)
            .unwrap();
        for k in 0..problem.us.len() {
            assert!(rel_err(&sol.filtered[k].mean, &oracle.filtered_means[k]) < 1e-8);
            assert!(rel_err(&sol.filtered[k].cov, &oracle.filtered_covs[k]) < 1e-8);
            assert!(rel_err(&sol.predicted[k].mean, &oracle.predicted_means[k]) < 1e-8);
            assert!(rel_err(&sol.predicted[k].cov, &oracle.predicted_covs[k]) < 1e-8);
        }
        assert!((sol.ll - oracle.ll).abs() <= 1e-8 * oracle.ll.abs());
    }
}

#[test]
fn non_default_scaling_is_still_exact_for_linear_maps() {
    let mut rng = StdRng::seed_from_u64(5);
    let problem = random_problem(&mut rng, 40);
    let oracle = exact_kalman(&problem);
    let c = problem.c;
    let mut kf = UkfFilter::<_, _, NX, NU, NY>::new(
        problem.system,
        move |x: &Vect<NX>| c * x,
        problem.q,
        problem.r,
        UtConfig {
            alpha: 0.7,
            beta: 2.0,
            kappa: 1.0,
        },
        GaussianBelief::new(problem.x0, problem.p0),
    )
    .unwrap();
    let sol = kf.forward_trajectory(&problem.us, &problem.ys).unwrap();
    assert!((sol.ll - oracle.ll).abs() <= 1e-8 * oracle.ll.abs());
    let last = problem.us.len() - 1;
    assert!(rel_err(&sol.filtered[last].cov, &oracle.filtered_covs[last]) < 1e-8);
}

#[test]
fn loglik_is_sum_of_increments_and_runs_are_deterministic() {
    let data = simulate(&SimulationConfig::new(300, 9)).unwrap();
    let run = || {
        build_cstr_filter(&CstrFilterConfig::default())
            .unwrap()
            .forward_trajectory(&data.inputs, &data.measurements)
            .unwrap()
    };
    let a = run();
    let b = run();
    assert_eq!(a, b);
    assert_eq!(a.ll.to_bits(), b.ll.to_bits());
    let total: f64 = a.loglik_steps.iter().sum();
    assert!((a.ll - total).abs() <= 1e-12 * a.ll.abs().max(1.0));
    assert_eq!(a.len(), 300);
    for belief in a.filtered.iter().chain(&a.predicted) {
        assert!(belief.asymmetry() <= 1e-12);
        assert!(belief.cov.diagonal().iter().all(|&d| d >= 0.0));
    }
}

#[test]
fn first_prediction_is_the_initial_belief() {
    let cfg = CstrFilterConfig::default();
    let mut kf = build_cstr_filter(&cfg).unwrap();
    let initial = *kf.belief();
    let data = simulate(&SimulationConfig::new(3, 1)).unwrap();
    let sol = kf.forward_trajectory(&data.inputs, &data.measurements).unwrap();
    assert_eq!(sol.predicted[0], initial);
    assert!((kf.time() - 3.0 * cfg.sample_time).abs() < 1e-15);
}

fn psd(m: [f64; 16], diag_boost: f64) -> Matrix4<f64> {
    let m = Matrix4::from_row_slice(&m);
    m * m.transpose() + Matrix4::identity() * diag_boost
}

proptest! {
    #[test]
    fn sigma_points_reconstruct_belief(
        mean in prop::array::uniform4(-10.0f64..10.0),
        factor in prop::array::uniform16(-1.0f64..1.0),
        boost in 1e-3f64..1.0,
    ) {
        let b = GaussianBelief::new(Vector4::from(mean), psd(factor, boost));
        let sp = sigma_points(&b, &UtConfig::default()).unwrap();
        prop_assert_eq!(sp.point(0), b.mean);
        for i in 1..=4 {
            let mirrored = sp.point(i) + sp.point(i + 4) - b.mean * 2.0;
            prop_assert!(mirrored.amax() <= 1e-12 * b.mean.amax().max(1.0));
        }
        let total: f64 = (0..sp.len()).map(|i| sp.mean_weight(i)).sum();
        prop_assert!((total - 1.0).abs() < 1e-15);
        prop_assert!((sp.weighted_mean() - b.mean).amax() <= 1e-12 * b.mean.amax().max(1.0));
        prop_assert!((sp.weighted_cov(&b.mean) - b.cov).amax() <= 1e-12 * b.cov.amax().max(1.0));
    }

    #[test]
    fn predict_and_correct_keep_covariance_symmetric(
        mean_offset in prop::array::uniform4(-0.2f64..0.2),
        y_offset in prop::array::uniform4(-1.0f64..1.0),
    ) {
        let mut kf = build_cstr_filter(&CstrFilterConfig::default()).unwrap();
        let x = kf.belief().mean + Vector4::from(mean_offset);
        let cov = kf.belief().cov;
        kf.set_belief(GaussianBelief::new(x, cov));
        let u = rtmbe::dynamics::nominal_input();
        for _ in 0..5 {
            kf.correct(&u, &(x + Vector4::from(y_offset))).unwrap();
            prop_assert!(kf.belief().asymmetry() <= 1e-12);
            kf.predict(&u).unwrap();
            prop_assert!(kf.belief().asymmetry() <= 1e-12);
        }
    }
}
