//! Checking a linear-gradient decomposition: definiteness of `L`, gradient
//! consistency and agreement with the native right-hand side.

use lyapstep::{
    check_definiteness, check_gradient_consistency, make_problem, sample_points, verify_linear_gradient_form,
    ProblemSpec, SquareMatrix,
};

fn main() -> lyapstep::Result<()> {
    for spec in [
        ProblemSpec::linear(1000.0)?,
        ProblemSpec::logistic_v1(1000.0)?,
        ProblemSpec::logistic_v2(1000.0)?,
        ProblemSpec::duffing_default(),
    ] {
        let system = make_problem(&spec);
        let points = sample_points(&spec, 200, 7);
        let form = verify_linear_gradient_form(&system, &points, 1e-9);
        // Central differences lose digits to rounding where V is large
        // (Duffing's quartic term reaches ~1e5), hence the loose tolerance.
        let grad = check_gradient_consistency(&system, &points, 1e-4);
        let worst_eig = points
            .iter()
            .map(|y| check_definiteness(&SquareMatrix::new(system.structure(y.as_slice()))?, 1e-10))
            .collect::<lyapstep::Result<Vec<_>>>()?
            .into_iter()
            .map(|r| r.max_sym_eigenvalue)
            .fold(f64::NEG_INFINITY, f64::max);
        println!(
            "{:<12} form ok: {:<5} gradient ok: {:<5} (rel err {:.1e})  max eig of sym(L): {worst_eig:.3e}",
            spec.name(),
            form.passed,
            grad.passed,
            grad.max_rel_error
        );
    }
    Ok(())
}
