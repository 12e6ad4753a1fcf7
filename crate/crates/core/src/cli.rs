//! The `lyapstep` command line: `integrate`, `sweep`, `order` and `phase`
//! experiments writing CSV data, JSON metadata and optional SVG plots.
//!
//! Exit codes: 0 success, 1 usage or validation error, 2 numerical failure
//! (output files are still written).

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analysis::{
    fit_order, global_error, integrate, log_spaced, max_lyapunov_increment, run_sweep, DgOptions, Integrator,
    MethodId, OrderFit, SweepMetadata, SweepOptions, Trajectory, Truth, MIN_FIT_PAIRS,
};
use crate::dgrad::{LtildeRule, NewtonConfig};
use crate::error::{Error, Result};
use crate::plot;
use crate::problems::{
    make_problem, reference_trajectory, sample_points, ProblemId, ProblemSpec, DEFAULT_DUFFING_A,
    DEFAULT_DUFFING_B, DEFAULT_H_REF, DEFAULT_LINEAR_A, DEFAULT_LOGISTIC_A,
};
use crate::system::{verify_linear_gradient_form, StateVector};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

pub const TRAJ_CSV: &str = "traj.csv";
pub const SWEEP_CSV: &str = "sweep.csv";
pub const SWEEP_META: &str = "sweep.meta.json";
pub const ORDER_CSV: &str = "order.csv";
pub const ORDER_FIT_CSV: &str = "order_fit.csv";

/// Step sizes of the default timing sweep.
pub const DEFAULT_SWEEP_H: [f64; 7] = [1e-3, 5e-4, 1e-4, 5e-5, 1e-5, 5e-6, 1e-6];

#[derive(Parser, Debug)]
#[command(name = "lyapstep", version, about = "Lyapunov-preserving discrete gradient experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Integrate one method and write traj.csv
    Integrate(IntegrateArgs),
    /// Time methods over a step-size grid and write sweep.csv
    Sweep(SweepArgs),
    /// Estimate convergence orders and write order.csv / order_fit.csv
    Order(OrderArgs),
    /// Write phase-plane trajectories of a 2-D problem
    Phase(PhaseArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProblemArg {
    Linear,
    #[value(name = "logistic-v1")]
    LogisticV1,
    #[value(name = "logistic-v2")]
    LogisticV2,
    Duffing,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum LtildeArg {
    #[default]
    Frozen,
    Midpoint,
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    /// Benchmark problem
    #[arg(long, value_enum)]
    pub problem: Option<ProblemArg>,
    /// Stiffness / damping parameter a
    #[arg(long, allow_negative_numbers = true)]
    pub a: Option<f64>,
    /// Duffing cubic coefficient b
    #[arg(long, allow_negative_numbers = true)]
    pub b: Option<f64>,
    /// Method(s), comma separated: euler, rk4, ros2, dg, dg-e, dg-i
    #[arg(long = "methods", visible_alias = "method", value_delimiter = ',', value_parser = parse_method)]
    pub methods: Option<Vec<MethodId>>,
    /// Step size(s), comma separated
    #[arg(long = "h-list", visible_alias = "h", value_delimiter = ',')]
    pub h: Option<Vec<f64>>,
    /// Final time
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Initial value, comma separated
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub y0: Option<Vec<f64>>,
    /// Output directory
    #[arg(long, default_value = "lyapstep-out")]
    pub out: PathBuf,
    /// Also write SVG plots
    #[arg(long)]
    pub plot: bool,
    /// Seed for sampled consistency checks
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Newton absolute and relative tolerance
    #[arg(long)]
    pub newton_tol: Option<f64>,
    /// Newton iteration cap
    #[arg(long)]
    pub newton_max_iters: Option<usize>,
    /// L̃ rule for discrete gradient methods
    #[arg(long, value_enum, default_value_t = LtildeArg::Frozen)]
    pub ltilde: LtildeArg,
}

#[derive(Args, Debug)]
pub struct IntegrateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Timed runs per cell (minimum is reported)
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
}

#[derive(Args, Debug)]
pub struct OrderArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Reference Euler step for problems without a closed-form solution
    #[arg(long, default_value_t = DEFAULT_H_REF)]
    pub h_ref: f64,
    /// Append synthetic error = h and error = h² series to check the fit
    #[arg(long)]
    pub self_test: bool,
}

#[derive(Args, Debug)]
pub struct PhaseArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Reference Euler step for the overlay curve (only used with --plot)
    #[arg(long, default_value_t = DEFAULT_H_REF)]
    pub h_ref: f64,
}

fn parse_method(s: &str) -> std::result::Result<MethodId, String> {
    s.parse::<MethodId>().map_err(|e| e.to_string())
}

/// Outcome of a command that ran to the end.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type CmdResult = std::result::Result<(), Failure>;

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Integrate(a) => cmd_integrate(&a),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::Order(a) => cmd_order(&a),
        Command::Phase(a) => cmd_phase(&a),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            EXIT_NUMERICAL
        }
    }
}

/// Resolved experiment setup shared by all subcommands.
struct Setup {
    spec: ProblemSpec,
    y0: StateVector,
    t_end: f64,
    dg: DgOptions,
}

fn setup(c: &CommonArgs, default_problem: ProblemArg) -> std::result::Result<Setup, Failure> {
    let problem = c.problem.unwrap_or(default_problem);
    let id = match problem {
        ProblemArg::Linear => ProblemId::Linear {
            a: c.a.unwrap_or(DEFAULT_LINEAR_A),
        },
        ProblemArg::LogisticV1 => ProblemId::LogisticV1 {
            a: c.a.unwrap_or(DEFAULT_LOGISTIC_A),
        },
        ProblemArg::LogisticV2 => ProblemId::LogisticV2 {
            a: c.a.unwrap_or(DEFAULT_LOGISTIC_A),
        },
        ProblemArg::Duffing => ProblemId::Duffing {
            a: c.a.unwrap_or(DEFAULT_DUFFING_A),
            b: c.b.unwrap_or(DEFAULT_DUFFING_B),
        },
    };
    if c.b.is_some() && problem != ProblemArg::Duffing {
        return Err(Failure::Usage("--b only applies to the duffing problem".into()));
    }
    let spec = ProblemSpec::new(id)?;
    let y0 = match &c.y0 {
        Some(v) => {
            let y0 = StateVector::new(v.clone())?;
            if y0.dim() != spec.dim() {
                return Err(Failure::Usage(format!(
                    "--y0 has {} components, {} needs {}",
                    y0.dim(),
                    spec.name(),
                    spec.dim()
                )));
            }
            y0
        }
        None => spec.default_y0().clone(),
    };
    let t_end = c.t_end.unwrap_or_else(|| spec.default_t_end());
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Failure::Usage(format!("--t-end must be > 0, got {t_end}")));
    }
    let mut newton = NewtonConfig::default();
    if let Some(tol) = c.newton_tol {
        newton.abs_tol = tol;
        newton.rel_tol = tol;
    }
    if let Some(n) = c.newton_max_iters {
        newton.max_iters = n;
    }
    newton.validate()?;
    let ltilde = match c.ltilde {
        LtildeArg::Frozen => LtildeRule::Frozen,
        LtildeArg::Midpoint => LtildeRule::Midpoint,
    };
    Ok(Setup {
        spec,
        y0,
        t_end,
        dg: DgOptions { ltilde, newton },
    })
}

fn step_sizes(c: &CommonArgs, default: &[f64]) -> std::result::Result<Vec<f64>, Failure> {
    let hs = c.h.clone().unwrap_or_else(|| default.to_vec());
    if hs.is_empty() {
        return Err(Failure::Usage("no step sizes given".into()));
    }
    if let Some(h) = hs.iter().find(|h| !(**h > 0.0 && h.is_finite())) {
        return Err(Failure::Usage(format!("step sizes must be > 0, got {h}")));
    }
    Ok(hs)
}

fn methods(c: &CommonArgs, default: &[MethodId]) -> std::result::Result<Vec<MethodId>, Failure> {
    let ms = c.methods.clone().unwrap_or_else(|| default.to_vec());
    if ms.is_empty() {
        return Err(Failure::Usage("no methods given".into()));
    }
    Ok(ms)
}

fn check_t_end(hs: &[f64], t_end: f64) -> CmdResult {
    match hs.iter().find(|&&h| t_end < h * (1.0 - 1e-9)) {
        Some(h) => Err(Failure::Usage(format!("--t-end {t_end} is shorter than step size {h}"))),
        None => Ok(()),
    }
}

/// Warns on stderr if the decomposition looks inconsistent at seeded points.
fn preflight(s: &Setup, integ: &Integrator, seed: u64) {
    let pts = sample_points(&s.spec, 32, seed);
    let report = verify_linear_gradient_form(integ.system(), &pts, 1e-9);
    if let Some(bad) = report.failures().next() {
        eprintln!(
            "warning: {} fails the linear-gradient check at {:?} (field mismatch {:e}, dissipation {:e})",
            integ.system().name(),
            bad.point,
            bad.field_mismatch,
            bad.dissipation
        );
    };
}

/// Formats a number with 17 significant digits; non-finite values as
/// `inf`, `-inf` or `nan`.
pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Writes `contents` to `dir/name` through a temporary file and rename.
pub fn write_atomic(dir: &Path, name: &str, contents: &[u8]) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.flush()?;
    let path = dir.join(name);
    tmp.persist(&path).map_err(|e| Error::Io(e.to_string()))?;
    Ok(path)
}

/// `t,y1,...,yn,V,delta_V,newton_iters,status`; diagnostics are blank on
/// the first row and for baseline methods.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut s = String::from("t");
    for i in 1..=traj.dim() {
        let _ = write!(s, ",y{i}");
    }
    s.push_str(",V,delta_V,newton_iters,status\n");
    let diags = traj.per_step();
    for (k, (t, y)) in traj.times().iter().zip(traj.states()).enumerate() {
        s.push_str(&fmt_num(*t));
        for v in y {
            s.push(',');
            s.push_str(&fmt_num(*v));
        }
        s.push(',');
        s.push_str(&fmt_num(traj.v_values()[k]));
        match k.checked_sub(1).and_then(|j| diags.get(j)) {
            Some(d) => {
                let _ = writeln!(s, ",{},{},{}", fmt_num(d.delta_v), d.newton_iters, d.status.as_str());
            }
            None => s.push_str(",,,\n"),
        }
    }
    s
}

/// `t,y1,y2,V`
pub fn phase_csv(traj: &Trajectory) -> String {
    let mut s = String::from("t,y1,y2,V\n");
    for (k, (t, y)) in traj.times().iter().zip(traj.states()).enumerate() {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            fmt_num(*t),
            fmt_num(y[0]),
            fmt_num(y[1]),
            fmt_num(traj.v_values()[k])
        );
    }
    s
}

fn write_svg(dir: &Path, name: &str, svg: Result<String>) -> CmdResult {
    write_atomic(dir, name, svg?.as_bytes())?;
    Ok(())
}

fn cmd_integrate(args: &IntegrateArgs) -> CmdResult {
    let c = &args.common;
    let s = setup(c, ProblemArg::Duffing)?;
    let ms = methods(c, &[MethodId::Dg])?;
    let hs = step_sizes(c, &[1e-4])?;
    if ms.len() != 1 || hs.len() != 1 {
        return Err(Failure::Usage("integrate takes exactly one --method and one --h".into()));
    }
    let (method, h) = (ms[0], hs[0]);
    check_t_end(&hs, s.t_end)?;
    let integ = method.integrator(&s.spec, &s.dg)?;
    preflight(&s, &integ, c.seed);
    let traj = integrate(&integ, &s.y0, h, s.t_end)?;
    write_atomic(&c.out, TRAJ_CSV, trajectory_csv(&traj).as_bytes())?;
    if c.plot {
        let title = format!("{} on {}, h = {h:e}", method, s.spec.name());
        write_svg(&c.out, "traj.svg", plot::trajectory_svg(&traj, &title))?;
    }
    println!(
        "{method} on {} h={h:e}: {} after {} samples, final state {:?}, max dV {:e}",
        s.spec.name(),
        traj.status(),
        traj.len(),
        traj.final_state(),
        max_lyapunov_increment(&traj)
    );
    if traj.status().is_completed() {
        Ok(())
    } else {
        Err(Failure::Numerical(format!("{method}: {}", traj.status())))
    }
}

#[derive(Serialize)]
struct SweepMetaFile<'a> {
    #[serde(flatten)]
    meta: &'a SweepMetadata,
    seed: u64,
    global_error_norm: &'static str,
}

fn cmd_sweep(args: &SweepArgs) -> CmdResult {
    let c = &args.common;
    let s = setup(c, ProblemArg::Duffing)?;
    let ms = methods(c, &[MethodId::Euler, MethodId::Rk4, MethodId::Ros2, MethodId::Dg])?;
    let hs = step_sizes(c, &DEFAULT_SWEEP_H)?;
    check_t_end(&hs, s.t_end)?;
    let opts = SweepOptions {
        repeats: args.repeats,
        dg: s.dg,
        threads: None,
    };
    let report = run_sweep(&s.spec, &s.y0, &ms, &hs, s.t_end, &opts)?;
    let mut csv = String::from("method,h,wall_time_s,max_delta_V,status\n");
    for r in &report.rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            r.method,
            fmt_num(r.h),
            fmt_num(r.wall_time_s),
            fmt_num(r.max_delta_v),
            r.status.label()
        );
    }
    write_atomic(&c.out, SWEEP_CSV, csv.as_bytes())?;
    let meta = SweepMetaFile {
        meta: &report.metadata,
        seed: c.seed,
        global_error_norm: "inf",
    };
    let json = serde_json::to_string_pretty(&meta).map_err(|e| Error::Io(e.to_string()))?;
    write_atomic(&c.out, SWEEP_META, json.as_bytes())?;
    if c.plot {
        write_svg(&c.out, "cost.svg", plot::cost_svg(&report.rows))?;
    }
    let failed = report.rows.iter().filter(|r| !r.status.is_completed()).count();
    println!(
        "sweep on {}: {} cells, {failed} not completed",
        s.spec.name(),
        report.rows.len()
    );
    Ok(())
}

fn cmd_order(args: &OrderArgs) -> CmdResult {
    let c = &args.common;
    let s = setup(c, ProblemArg::LogisticV1)?;
    let ms = methods(c, &[MethodId::Euler, MethodId::DgE, MethodId::DgI])?;
    let hs = step_sizes(c, &log_spaced(1e-6, 1e-4, 20))?;
    check_t_end(&hs, s.t_end)?;
    let integrators = ms
        .iter()
        .map(|m| m.integrator(&s.spec, &s.dg))
        .collect::<Result<Vec<_>>>()?;

    let has_exact = make_problem(&s.spec).has_exact_solution();
    let mut references = Vec::new();
    if !has_exact {
        if !(args.h_ref > 0.0) {
            return Err(Failure::Usage("--h-ref must be > 0".into()));
        }
        for &h in &hs {
            let ratio = h / args.h_ref;
            let stride = ratio.round();
            if stride < 1.0 || (ratio - stride).abs() > 1e-6 * stride {
                return Err(Failure::Usage(format!(
                    "step size {h:e} is not a multiple of --h-ref {:e}",
                    args.h_ref
                )));
            }
            let sys = make_problem(&s.spec);
            let r = reference_trajectory(&sys, &s.y0, s.t_end, args.h_ref, Some(stride as usize))
                .map_err(|e| Failure::Numerical(e.to_string()))?;
            references.push(r);
        }
    }

    let mut csv = String::from("method,h,global_error\n");
    let mut fit_csv = String::from("method,slope,intercept,residual\n");
    let mut plotted = Vec::new();
    let mut unfit = Vec::new();
    for (m, integ) in ms.iter().zip(&integrators) {
        let mut pairs = Vec::new();
        for (j, &h) in hs.iter().enumerate() {
            let traj = integrate(integ, &s.y0, h, s.t_end)?;
            let err = if traj.status().is_completed() {
                let truth = if has_exact {
                    Truth::Exact(integ.system())
                } else {
                    Truth::Reference(&references[j])
                };
                global_error(&traj, truth)?
            } else {
                f64::INFINITY
            };
            let _ = writeln!(csv, "{m},{},{}", fmt_num(h), fmt_num(err));
            if err.is_finite() && err > 0.0 {
                pairs.push((h, err));
            }
        }
        let fit = fit_pairs(m.name(), &pairs, &mut fit_csv, &mut unfit);
        plotted.push((m.name().to_string(), pairs, fit));
    }
    if args.self_test {
        for p in [1.0, 2.0] {
            let name = format!("synthetic-p{p}");
            let pairs: Vec<(f64, f64)> = hs.iter().map(|&h| (h, h.powf(p))).collect();
            for (h, e) in &pairs {
                let _ = writeln!(csv, "{name},{},{}", fmt_num(*h), fmt_num(*e));
            }
            let fit = fit_pairs(&name, &pairs, &mut fit_csv, &mut unfit);
            plotted.push((name, pairs, fit));
        }
    }
    write_atomic(&c.out, ORDER_CSV, csv.as_bytes())?;
    write_atomic(&c.out, ORDER_FIT_CSV, fit_csv.as_bytes())?;
    if c.plot {
        write_svg(&c.out, "order.svg", plot::order_svg(&plotted))?;
    }
    for (name, _, fit) in &plotted {
        if let Some(f) = fit {
            println!("{name}: slope {:.4} (residual {:.2e})", f.slope, f.residual);
        }
    }
    if unfit.is_empty() {
        Ok(())
    } else {
        Err(Failure::Numerical(format!(
            "no order fit (fewer than {MIN_FIT_PAIRS} usable step sizes) for: {}",
            unfit.join(", ")
        )))
    }
}

fn fit_pairs(name: &str, pairs: &[(f64, f64)], fit_csv: &mut String, unfit: &mut Vec<String>) -> Option<OrderFit> {
    match fit_order(pairs) {
        Ok(f) => {
            let _ = writeln!(
                fit_csv,
                "{name},{},{},{}",
                fmt_num(f.slope),
                fmt_num(f.intercept),
                fmt_num(f.residual)
            );
            Some(f)
        }
        Err(_) => {
            unfit.push(name.to_string());
            None
        }
    }
}

fn cmd_phase(args: &PhaseArgs) -> CmdResult {
    let c = &args.common;
    let s = setup(c, ProblemArg::Duffing)?;
    if s.spec.dim() != 2 {
        return Err(Failure::Usage(format!(
            "phase portraits need a 2-D problem, {} has dimension {}",
            s.spec.name(),
            s.spec.dim()
        )));
    }
    let ms = methods(c, &[MethodId::Dg, MethodId::Ros2])?;
    let hs = step_sizes(c, &[1e-3])?;
    if hs.len() != 1 {
        return Err(Failure::Usage("phase takes one --h".into()));
    }
    let h = hs[0];
    check_t_end(&hs, s.t_end)?;
    let mut trajs = Vec::new();
    let mut failed = Vec::new();
    for m in &ms {
        let integ = m.integrator(&s.spec, &s.dg)?;
        let traj = integrate(&integ, &s.y0, h, s.t_end)?;
        write_atomic(&c.out, &format!("phase_{m}.csv"), phase_csv(&traj).as_bytes())?;
        println!("{m}: {}, final state {:?}", traj.status(), traj.final_state());
        if !traj.status().is_completed() {
            failed.push(format!("{m}: {}", traj.status()));
        }
        trajs.push((m.name().to_string(), traj));
    }
    if c.plot {
        let reference = reference_trajectory(&make_problem(&s.spec), &s.y0, s.t_end, args.h_ref, None);
        if let Err(e) = &reference {
            eprintln!("warning: reference curve omitted: {e}");
        }
        let curves: Vec<(String, &Trajectory)> = trajs.iter().map(|(n, t)| (n.clone(), t)).collect();
        write_svg(
            &c.out,
            "phase.svg",
            plot::phase_svg(&curves, reference.as_ref().ok().map(|r| r.samples())),
        )?;
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Numerical(failed.join("; ")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format_round_trips() {
        for x in [0.1, 1.0 / 3.0, 1e-300, -2.5e17, 5e-324] {
            assert_eq!(fmt_num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_num(f64::INFINITY), "inf");
        assert_eq!(fmt_num(f64::NEG_INFINITY), "-inf");
        assert_eq!(fmt_num(f64::NAN), "nan");
    }

    #[test]
    fn usage_errors_exit_1() {
        assert_eq!(run(["lyapstep", "integrate", "--problem", "nope"]), EXIT_USAGE);
        assert_eq!(run(["lyapstep", "integrate", "--method", "rk45"]), EXIT_USAGE);
        assert_eq!(run(["lyapstep", "frobnicate"]), EXIT_USAGE);
        assert_eq!(run(["lyapstep", "integrate", "--problem", "linear", "--b", "2"]), EXIT_USAGE);
        assert_eq!(run(["lyapstep", "phase", "--problem", "linear"]), EXIT_USAGE);
        assert_eq!(run(["lyapstep", "integrate", "--h", "-1"]), EXIT_USAGE);
    }
}
