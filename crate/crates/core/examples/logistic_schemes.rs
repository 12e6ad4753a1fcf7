//! Explicit and implicit discrete gradient steps on the stiff logistic
//! equation at a step size where forward Euler blows up.

use lyapstep::{integrate, DgOptions, MethodId, ProblemSpec};

fn main() -> lyapstep::Result<()> {
    let spec = ProblemSpec::logistic_v1(1000.0)?;
    let y0 = spec.default_y0().clone();
    let h = 7e-4;
    for method in [MethodId::Euler, MethodId::DgE, MethodId::DgI] {
        let integ = method.integrator(&spec, &DgOptions::default())?;
        let traj = integrate(&integ, &y0, h, spec.default_t_end())?;
        let tail = traj.states().skip(traj.len() / 2).map(|y| (y[0] - 1.0).abs()).fold(0.0, f64::max);
        println!(
            "{:>5}: {:<14} final y = {:<24e} sup |y-1| over second half = {tail:.3e}",
            method.name(),
            traj.status().to_string(),
            traj.final_state()[0]
        );
    }
    Ok(())
}
