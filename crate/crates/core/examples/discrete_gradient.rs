//! The Itoh–Abe discrete gradient and its defining identity
//! `∇̄V(y, z)·(z − y) = V(z) − V(y)`.

use lyapstep::{make_problem, DgScheme, DiscreteGradientKind, ProblemSpec, StateVector};

fn main() -> lyapstep::Result<()> {
    let system = make_problem(&ProblemSpec::duffing_default());
    let y = StateVector::new(vec![0.3, 0.0])?;
    let z = StateVector::new(vec![0.1, -0.4])?;

    for ordering in [vec![0, 1], vec![1, 0]] {
        let scheme = DgScheme::new(system.clone())
            .with_kind(DiscreteGradientKind::itoh_abe_with_ordering(ordering.clone())?)?;
        let g = scheme.discrete_gradient(&y, &z)?;
        let lhs: f64 = g.as_slice().iter().zip(z.as_slice().iter().zip(y.as_slice())).map(|(g, (z, y))| g * (z - y)).sum();
        let rhs = system.potential(z.as_slice()) - system.potential(y.as_slice());
        println!("ordering {ordering:?}: dg = {:?}", g.as_slice());
        println!("  dg·(z-y) = {lhs:.15e}\n  V(z)-V(y) = {rhs:.15e}");
    }

    // With z = y the discrete gradient reduces to the ordinary gradient.
    let scheme = DgScheme::new(system.clone());
    println!("dg(y, y) = {:?}", scheme.discrete_gradient(&y, &y)?.as_slice());
    println!("∇V(y)    = {:?}", system.gradient(y.as_slice()));
    Ok(())
}
