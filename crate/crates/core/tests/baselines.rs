use approx::assert_relative_eq;
use lyapstep::{make_problem, BaselineMethod, DgScheme, ProblemSpec, StateVector, ROS2_D};
use proptest::prelude::*;

fn step(method: BaselineMethod, a: f64, y: f64, h: f64) -> f64 {
    let sys = make_problem(&ProblemSpec::linear(a).unwrap());
    method.step(&sys, &StateVector::new(vec![y]).unwrap(), h).unwrap().as_slice()[0]
}

#[test]
fn rk4_on_decay_matches_taylor_polynomial() {
    // 1 − z + z²/2 − z³/6 + z⁴/24 at z = 0.1
    assert_relative_eq!(step(BaselineMethod::Rk4, 1.0, 1.0, 0.1), 0.9048375000000001, max_relative = 1e-15);
}

#[test]
fn ros2_damping_constant() {
    assert_relative_eq!(ROS2_D, 1.0 / (2.0 + 2f64.sqrt()), max_relative = 1e-15);
}

proptest! {
    #[test]
    fn stability_functions_on_linear_decay(z in 1e-3f64..50.0, y in -10.0f64..10.0) {
        let (a, h) = (1000.0, z / 1000.0);
        let euler = 1.0 - z;
        let rk4 = 1.0 - z + z * z / 2.0 - z.powi(3) / 6.0 + z.powi(4) / 24.0;
        let w = 1.0 + ROS2_D * z;
        let ros2 = 1.0 - 2.0 * z / w + (z + z * z / 2.0) / (w * w);
        let trap = (1.0 - z / 2.0) / (1.0 + z / 2.0);
        let tol = |r: f64| 1e-13 * (1.0 + (r * y).abs());
        let e = step(BaselineMethod::Euler, a, y, h);
        prop_assert!((e - euler * y).abs() <= tol(euler), "euler {e} vs {}", euler * y);
        let r = step(BaselineMethod::Rk4, a, y, h);
        prop_assert!((r - rk4 * y).abs() <= tol(rk4), "rk4 {r} vs {}", rk4 * y);
        let r2 = step(BaselineMethod::ros2(), a, y, h);
        // ros2 differentiates f numerically; the Jacobian carries ~1e-8
        // relative rounding error even for a linear field.
        prop_assert!((r2 - ros2 * y).abs() <= 1e-6 * (1.0 + (ros2 * y).abs()), "ros2 {r2} vs {}", ros2 * y);
        let dg = DgScheme::new(make_problem(&ProblemSpec::linear(a).unwrap()))
            .step(&StateVector::new(vec![y]).unwrap(), h).unwrap();
        let dg = dg.state.as_slice()[0];
        prop_assert!((dg - trap * y).abs() <= tol(trap), "dg {dg} vs {}", trap * y);
    }
}
