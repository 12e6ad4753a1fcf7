//! Writes a Duffing phase portrait (discrete gradient vs ros2, with a fine
//! Euler reference) to `phase.svg` in the given directory.

use std::path::PathBuf;

use lyapstep::plot::phase_svg;
use lyapstep::{integrate, make_problem, reference_trajectory, DgOptions, MethodId, ProblemSpec};

fn main() -> lyapstep::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| ".".into()));
    let spec = ProblemSpec::duffing_default();
    let y0 = spec.default_y0().clone();
    let t_end = 2.0;
    let h = 1e-3;
    let mut trajs = Vec::new();
    for method in [MethodId::Dg, MethodId::Ros2] {
        let integ = method.integrator(&spec, &DgOptions::default())?;
        trajs.push((method.to_string(), integrate(&integ, &y0, h, t_end)?));
    }
    let reference = reference_trajectory(&make_problem(&spec), &y0, t_end, 1e-7, Some(100))?;
    let curves: Vec<_> = trajs.iter().map(|(n, t)| (n.clone(), t)).collect();
    let svg = phase_svg(&curves, Some(reference.samples()))?;
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("phase.svg");
    std::fs::write(&path, svg)?;
    println!("wrote {}", path.display());
    Ok(())
}
