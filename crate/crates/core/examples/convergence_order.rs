//! Empirical convergence orders against the closed-form logistic solution.

use lyapstep::{fit_order, global_error, integrate, log_spaced, DgOptions, MethodId, ProblemSpec, Truth};

fn main() -> lyapstep::Result<()> {
    let spec = ProblemSpec::logistic_v1(1000.0)?;
    let y0 = spec.default_y0().clone();
    let hs = log_spaced(1e-6, 1e-4, 10);
    for method in [MethodId::Euler, MethodId::DgE, MethodId::DgI] {
        let integ = method.integrator(&spec, &DgOptions::default())?;
        let mut pairs = Vec::new();
        for &h in &hs {
            let traj = integrate(&integ, &y0, h, spec.default_t_end())?;
            pairs.push((h, global_error(&traj, Truth::Exact(integ.system()))?));
        }
        let fit = fit_order(&pairs)?;
        println!("{:>5}: order {:.3}  (log-log residual {:.1e})", method.name(), fit.slope, fit.residual);
    }
    Ok(())
}
