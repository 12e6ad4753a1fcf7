//! A user-defined system: a damped pendulum `θ'' = −sin θ − c θ'` written as
//! `y' = L∇V` with `V = 1 − cos θ + ω²/2` and `L = [[0, 1], [−1, −c]]`.

use lyapstep::{integrate, max_lyapunov_increment, DgScheme, GradientSystem, Integrator, StateVector};

fn main() -> lyapstep::Result<()> {
    let c = 0.5;
    let pendulum = GradientSystem::builder("pendulum", 2)
        .potential(|y| 1.0 - y[0].cos() + 0.5 * y[1] * y[1])
        .gradient(|y, g| {
            g[0] = y[0].sin();
            g[1] = y[1];
        })
        .structure(move |_, l| {
            l[(0, 0)] = 0.0;
            l[(0, 1)] = 1.0;
            l[(1, 0)] = -1.0;
            l[(1, 1)] = -c;
        })
        .equilibrium(vec![0.0, 0.0])
        .build()?;

    let integ = Integrator::implicit(DgScheme::new(pendulum));
    let y0 = StateVector::new(vec![3.0, 0.0])?;
    let traj = integrate(&integ, &y0, 0.25, 40.0)?;
    println!("status {}, max ΔV {:+.3e}", traj.status(), max_lyapunov_increment(&traj));
    for k in (0..traj.len()).step_by(20) {
        let y = traj.state(k);
        println!("t={:>5.1}  θ={:+.6}  ω={:+.6}  V={:.6e}", traj.times()[k], y[0], y[1], traj.v_values()[k]);
    }
    Ok(())
}
