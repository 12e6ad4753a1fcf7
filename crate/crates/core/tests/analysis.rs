use lyapstep::{
    fit_order, global_error, integrate, log_spaced, max_lyapunov_increment, DgOptions, MethodId,
    ProblemSpec, StateVector, TrajectoryStatus, Truth,
};
use proptest::prelude::*;

#[test]
fn errors_shrink_with_the_step() {
    let spec = ProblemSpec::logistic_v1(1000.0).unwrap();
    for method in [MethodId::Euler, MethodId::DgE, MethodId::DgI] {
        let integ = method.integrator(&spec, &DgOptions::default()).unwrap();
        let errs: Vec<f64> = [1e-4, 1e-5, 1e-6]
            .iter()
            .map(|&h| {
                let t = integrate(&integ, spec.default_y0(), h, 0.05).unwrap();
                global_error(&t, Truth::Exact(integ.system())).unwrap()
            })
            .collect();
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "{method}: {errs:?}");
    }
}

#[test]
fn single_step_trajectory() {
    let spec = ProblemSpec::linear(1.0).unwrap();
    let integ = MethodId::Dg.integrator(&spec, &DgOptions::default()).unwrap();
    let t = integrate(&integ, &StateVector::new(vec![5.0]).unwrap(), 1.0, 1.0).unwrap();
    assert_eq!(t.len(), 2);
    assert_eq!(t.times(), &[0.0, 1.0]);
    assert!((t.final_state()[0] - 5.0 / 3.0).abs() < 1e-14);
    assert_eq!(t.status(), TrajectoryStatus::Completed);
}

#[test]
fn euler_blowup_is_reported_with_its_step() {
    let spec = ProblemSpec::logistic_v1(1000.0).unwrap();
    let integ = MethodId::Euler.integrator(&spec, &DgOptions::default()).unwrap();
    let t = integrate(&integ, spec.default_y0(), 7e-4, 0.05).unwrap();
    assert!(matches!(t.status(), TrajectoryStatus::Blowup(_)));
    assert_eq!(max_lyapunov_increment(&t), f64::INFINITY);
}

#[test]
fn fit_rejects_too_few_points() {
    assert!(fit_order(&[(1e-3, 1e-3), (1e-4, 1e-4)]).is_err());
}

proptest! {
    #[test]
    fn fit_recovers_exact_power_laws(p in 0.5f64..4.0, c in 1e-3f64..1e3) {
        let pairs: Vec<(f64, f64)> = log_spaced(1e-6, 1e-2, 12).into_iter().map(|h| (h, c * h.powf(p))).collect();
        let fit = fit_order(&pairs).unwrap();
        prop_assert!((fit.slope - p).abs() < 1e-10);
        prop_assert!((fit.intercept - c.ln()).abs() < 1e-8);
        prop_assert!(fit.residual < 1e-8);
    }
}
