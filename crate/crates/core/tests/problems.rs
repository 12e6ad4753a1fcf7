use approx::assert_relative_eq;
use lyapstep::{
    check_definiteness, exact_solution, make_problem, sample_points, verify_linear_gradient_form, Definiteness,
    ProblemSpec, SquareMatrix, StateVector,
};
use proptest::prelude::*;

fn all_specs() -> Vec<ProblemSpec> {
    vec![
        ProblemSpec::linear(1000.0).unwrap(),
        ProblemSpec::logistic_v1(1000.0).unwrap(),
        ProblemSpec::logistic_v2(1000.0).unwrap(),
        ProblemSpec::duffing_default(),
        ProblemSpec::duffing(1000.0, 1.0).unwrap(),
    ]
}

#[test]
fn logistic_closed_form_value() {
    // 1 / (1 + (1/5 − 1)·e^{−1})
    let spec = ProblemSpec::logistic_v1(1000.0).unwrap();
    let y = exact_solution(&spec, 1e-3, &StateVector::new(vec![5.0]).unwrap()).unwrap();
    let oracle = 1.0 / (1.0 - 0.8 * (-1.0f64).exp());
    assert_relative_eq!(y.as_slice()[0], oracle, max_relative = 1e-15);
    assert_relative_eq!(y.as_slice()[0], 1.417039867725088, max_relative = 1e-14);
}

#[test]
fn logistic_field_at_default_start() {
    for spec in [ProblemSpec::logistic_v1(1000.0).unwrap(), ProblemSpec::logistic_v2(1000.0).unwrap()] {
        let f = make_problem(&spec).vector_field(&[5.0]);
        assert_relative_eq!(f[0], -20000.0, max_relative = 1e-15);
    }
}

#[test]
fn equilibria_are_stationary() {
    for spec in all_specs() {
        let sys = make_problem(&spec);
        assert!(!sys.equilibria().is_empty());
        for e in sys.equilibria() {
            let f = sys.vector_field(e.as_slice());
            assert!(f.iter().all(|v| v.abs() <= 1e-13), "{} at {:?}: {f:?}", spec.name(), e);
        }
    }
}

#[test]
fn decompositions_reproduce_the_native_field() {
    for spec in all_specs() {
        let sys = make_problem(&spec);
        let report = verify_linear_gradient_form(&sys, &sample_points(&spec, 500, 11), 1e-9);
        assert!(report.passed, "{}", spec.name());
    }
}

#[test]
fn invalid_parameters_are_rejected() {
    assert!(ProblemSpec::linear(0.0).is_err());
    assert!(ProblemSpec::logistic_v1(-1.0).is_err());
    assert!(ProblemSpec::duffing(1.0, 0.0).is_err());
    let spec = ProblemSpec::logistic_v1(1.0).unwrap();
    assert!(exact_solution(&spec, 1.0, &StateVector::new(vec![-1.0]).unwrap()).is_err());
    assert!(exact_solution(&ProblemSpec::duffing_default(), 1.0, spec.default_y0()).is_err());
}

proptest! {
    #[test]
    fn logistic_v1_structure_sign(y in -5.0f64..5.0) {
        let sys = make_problem(&ProblemSpec::logistic_v1(1000.0).unwrap());
        let l = sys.structure(&[y])[(0, 0)];
        // L = −a y: dissipative exactly on the positive half-line.
        prop_assert_eq!(l <= 0.0, y >= 0.0);
        let f = sys.vector_field(&[y])[0];
        let g = sys.gradient(&[y])[0];
        prop_assert_eq!(g * f <= 0.0, y >= 0.0 || y == 1.0);
    }

    #[test]
    fn definiteness_ignores_skew_parts(
        sym in prop::array::uniform3(-5i32..=5),
        skew in prop::array::uniform3(-20i32..=20),
    ) {
        // Integer entries keep the symmetric part exact.
        let (a, b, c) = (sym[0] as f64, sym[1] as f64, sym[2] as f64);
        let s = [[a, b, 0.0], [b, c, 0.0], [0.0, 0.0, -1.0]];
        let k = [[0.0, skew[0] as f64, skew[1] as f64], [-(skew[0] as f64), 0.0, skew[2] as f64], [-(skew[1] as f64), -(skew[2] as f64), 0.0]];
        let rows = |m: [[f64; 3]; 3]| -> SquareMatrix {
            let r: Vec<&[f64]> = m.iter().map(|r| r.as_slice()).collect();
            SquareMatrix::from_rows(&r).unwrap()
        };
        let mut sum = s;
        for i in 0..3 { for j in 0..3 { sum[i][j] += k[i][j]; } }
        let plain = check_definiteness(&rows(s), 1e-10).unwrap();
        let skewed = check_definiteness(&rows(sum), 1e-10).unwrap();
        prop_assert_eq!(plain.classification, skewed.classification);
        prop_assert!((plain.max_sym_eigenvalue - skewed.max_sym_eigenvalue).abs() < 1e-12);
        let pure_skew = check_definiteness(&rows(k), 1e-10).unwrap();
        prop_assert_eq!(pure_skew.classification, Definiteness::NegativeSemidefinite);
    }
}
