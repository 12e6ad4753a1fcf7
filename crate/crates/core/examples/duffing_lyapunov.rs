//! Monotone decay of the Lyapunov function on the Duffing oscillator with
//! the discrete gradient method, compared with explicit and Rosenbrock
//! baselines.

use lyapstep::{integrate, max_lyapunov_increment, DgOptions, MethodId, ProblemSpec};

fn main() -> lyapstep::Result<()> {
    let spec = ProblemSpec::duffing_default();
    let y0 = spec.default_y0().clone();
    let t_end = 1.0;
    for h in [1e-3, 1e-4] {
        for method in [MethodId::Euler, MethodId::Rk4, MethodId::Ros2, MethodId::Dg] {
            let integ = method.integrator(&spec, &DgOptions::default())?;
            let traj = integrate(&integ, &y0, h, t_end)?;
            println!(
                "h={h:e} {:>5}: {:<14} max ΔV = {:+.3e}",
                method.name(),
                traj.status().to_string(),
                max_lyapunov_increment(&traj)
            );
        }
    }
    Ok(())
}
