//! Fixed-step integration driver, Lyapunov-increment accounting, global
//! errors, convergence-order fits and timing sweeps.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::baselines::{BaselineMethod, BaselineWorkspace, Rhs};
use crate::dgrad::{DgScheme, LtildeRule, NewtonConfig, StepDiagnostics, StepStatus, Workspace};
use crate::error::{Error, Result};
use crate::problems::{make_problem, steps_to_reach, ProblemSpec, ReferenceTrajectory};
use crate::system::{all_finite, check_dim, norm_inf, GradientSystem, StateVector};

/// A state whose ∞-norm exceeds this is treated as having blown up.
pub const BLOWUP_THRESHOLD: f64 = 1e8;

/// Environment variable capping the number of sweep worker threads.
pub const THREADS_ENV: &str = "LYAPSTEP_THREADS";

/// How a trajectory ended. Step indices are 0-based: `Blowup(k)` means the
/// step from sample `k` to `k+1` failed and the trajectory stops at sample `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajectoryStatus {
    Completed,
    Blowup(usize),
    NewtonFailure(usize),
    /// A step could not be formed (singular linear system or vanishing
    /// explicit denominator).
    StepFailure(usize),
}

impl TrajectoryStatus {
    pub fn label(&self) -> &'static str {
        match self {
            TrajectoryStatus::Completed => "completed",
            TrajectoryStatus::Blowup(_) => "blowup",
            TrajectoryStatus::NewtonFailure(_) => "newton_failure",
            TrajectoryStatus::StepFailure(_) => "step_failure",
        }
    }

    pub fn failed_step(&self) -> Option<usize> {
        match *self {
            TrajectoryStatus::Completed => None,
            TrajectoryStatus::Blowup(k)
            | TrajectoryStatus::NewtonFailure(k)
            | TrajectoryStatus::StepFailure(k) => Some(k),
        }
    }

    pub fn is_completed(&self) -> bool {
        *self == TrajectoryStatus::Completed
    }
}

impl fmt::Display for TrajectoryStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.failed_step() {
            None => f.write_str(self.label()),
            Some(k) => write!(f, "{}({k})", self.label()),
        }
    }
}

/// Samples on a uniform grid `t_k = k·h`, with `V` at every sample and
/// per-step diagnostics for discrete gradient methods (empty for baselines).
#[derive(Debug, Clone)]
pub struct Trajectory {
    dim: usize,
    h: f64,
    times: Vec<f64>,
    states: Vec<f64>,
    v_values: Vec<f64>,
    per_step: Vec<StepDiagnostics>,
    status: TrajectoryStatus,
}

impl Trajectory {
    pub(crate) fn with_capacity(dim: usize, h: f64, samples: usize) -> Self {
        Trajectory {
            dim,
            h,
            times: Vec::with_capacity(samples),
            states: Vec::with_capacity(samples * dim),
            v_values: Vec::with_capacity(samples),
            per_step: Vec::new(),
            status: TrajectoryStatus::Completed,
        }
    }

    pub(crate) fn push_sample(&mut self, t: f64, y: &[f64], v: f64) {
        self.times.push(t);
        self.states.extend_from_slice(y);
        self.v_values.push(v);
    }

    pub(crate) fn set_status(&mut self, status: TrajectoryStatus) {
        self.status = status;
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Grid spacing.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn v_values(&self) -> &[f64] {
        &self.v_values
    }

    pub fn state(&self, k: usize) -> &[f64] {
        &self.states[k * self.dim..(k + 1) * self.dim]
    }

    pub fn states(&self) -> impl Iterator<Item = &[f64]> {
        self.states.chunks_exact(self.dim)
    }

    pub fn final_state(&self) -> &[f64] {
        self.state(self.len() - 1)
    }

    /// Component `i` of every sample.
    pub fn component(&self, i: usize) -> Vec<f64> {
        self.states().map(|y| y[i]).collect()
    }

    pub fn per_step(&self) -> &[StepDiagnostics] {
        &self.per_step
    }

    pub fn status(&self) -> TrajectoryStatus {
        self.status
    }

    /// `V[k+1] − V[k]` for every step.
    pub fn delta_v(&self) -> Vec<f64> {
        self.v_values.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

/// A configured one-step method.
#[derive(Debug, Clone)]
pub enum Integrator {
    Baseline {
        method: BaselineMethod,
        system: GradientSystem,
    },
    /// Newton-solved discrete gradient step.
    Implicit(DgScheme),
    /// Closed-form discrete gradient step for scalar quadratic potentials.
    Explicit1d(DgScheme),
}

impl Integrator {
    pub fn baseline(method: BaselineMethod, system: GradientSystem) -> Self {
        Integrator::Baseline { method, system }
    }

    pub fn implicit(scheme: DgScheme) -> Self {
        Integrator::Implicit(scheme)
    }

    pub fn explicit_1d(scheme: DgScheme) -> Result<Self> {
        if !scheme.supports_explicit_1d() {
            return Err(Error::Unsupported(format!(
                "explicit discrete gradient step is unavailable for {}",
                scheme.system().name()
            )));
        }
        Ok(Integrator::Explicit1d(scheme))
    }

    /// System whose potential is recorded along the trajectory.
    pub fn system(&self) -> &GradientSystem {
        match self {
            Integrator::Baseline { system, .. } => system,
            Integrator::Implicit(s) | Integrator::Explicit1d(s) => s.system(),
        }
    }

    pub fn is_discrete_gradient(&self) -> bool {
        !matches!(self, Integrator::Baseline { .. })
    }
}

/// Method names accepted on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodId {
    Euler,
    Rk4,
    Ros2,
    /// Implicit discrete gradient on the selected problem.
    Dg,
    /// Explicit discrete gradient; logistic problems use the `V = ½(1−y)²`
    /// decomposition.
    DgE,
    /// Implicit discrete gradient; logistic problems use the cubic
    /// `V = −½y² + ⅓y³` decomposition.
    DgI,
}

impl MethodId {
    pub const ALL: [MethodId; 6] = [
        MethodId::Euler,
        MethodId::Rk4,
        MethodId::Ros2,
        MethodId::Dg,
        MethodId::DgE,
        MethodId::DgI,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            MethodId::Euler => "euler",
            MethodId::Rk4 => "rk4",
            MethodId::Ros2 => "ros2",
            MethodId::Dg => "dg",
            MethodId::DgE => "dg-e",
            MethodId::DgI => "dg-i",
        }
    }

    /// Builds the integrator this method uses on `problem`.
    pub fn integrator(&self, problem: &ProblemSpec, dg: &DgOptions) -> Result<Integrator> {
        use crate::problems::ProblemId;
        let a = problem.id().a();
        let implicit = |spec: &ProblemSpec| -> Result<Integrator> {
            Ok(Integrator::Implicit(
                DgScheme::new(make_problem(spec))
                    .with_ltilde(dg.ltilde)
                    .with_newton(dg.newton)?,
            ))
        };
        match self {
            MethodId::Euler => Ok(Integrator::baseline(BaselineMethod::Euler, make_problem(problem))),
            MethodId::Rk4 => Ok(Integrator::baseline(BaselineMethod::Rk4, make_problem(problem))),
            MethodId::Ros2 => Ok(Integrator::baseline(BaselineMethod::ros2(), make_problem(problem))),
            MethodId::Dg => implicit(problem),
            MethodId::DgI => match problem.id() {
                ProblemId::LogisticV1 { .. } => implicit(&ProblemSpec::logistic_v2(a)?),
                _ => implicit(problem),
            },
            MethodId::DgE => {
                if dg.ltilde != LtildeRule::Frozen {
                    return Err(Error::Unsupported("dg-e requires frozen L̃".into()));
                }
                let spec = match problem.id() {
                    ProblemId::LogisticV2 { .. } => ProblemSpec::logistic_v1(a)?,
                    _ => problem.clone(),
                };
                if spec.dim() != 1 {
                    return Err(Error::Unsupported(format!(
                        "dg-e needs a scalar problem, {} has dimension {}",
                        spec.name(),
                        spec.dim()
                    )));
                }
                Integrator::explicit_1d(DgScheme::new(make_problem(&spec)))
            }
        }
    }
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MethodId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MethodId::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown method '{s}'")))
    }
}

/// Discrete gradient settings shared by every DG method in an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DgOptions {
    pub ltilde: LtildeRule,
    pub newton: NewtonConfig,
}

trait Observer {
    fn sample(&mut self, t: f64, y: &[f64], v: f64);
    fn step(&mut self, diag: Option<StepDiagnostics>);
}

impl Observer for Trajectory {
    fn sample(&mut self, t: f64, y: &[f64], v: f64) {
        self.push_sample(t, y, v);
    }

    fn step(&mut self, diag: Option<StepDiagnostics>) {
        if let Some(d) = diag {
            self.per_step.push(d);
        }
    }
}

/// Keeps only what a sweep row needs.
struct Summary {
    last_v: f64,
    max_delta_v: f64,
    samples: usize,
}

impl Observer for Summary {
    fn sample(&mut self, _t: f64, _y: &[f64], v: f64) {
        if self.samples > 0 {
            self.max_delta_v = self.max_delta_v.max(v - self.last_v);
        }
        self.last_v = v;
        self.samples += 1;
    }

    fn step(&mut self, _diag: Option<StepDiagnostics>) {}
}

fn check_integration_args(integ: &Integrator, y0: &StateVector, h: f64, t_end: f64) -> Result<()> {
    check_dim(integ.system().dim(), y0.dim())?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter(format!("step size must be > 0, got {h}")));
    }
    if !(t_end.is_finite() && t_end >= h * (1.0 - 1e-9)) {
        return Err(Error::InvalidParameter(format!(
            "final time {t_end} must be >= step size {h}"
        )));
    }
    Ok(())
}

fn drive<O: Observer>(integ: &Integrator, y0: &[f64], h: f64, t_end: f64, obs: &mut O) -> TrajectoryStatus {
    let n = y0.len();
    let n_steps = steps_to_reach(t_end, h);
    let sys = integ.system();
    let mut y = y0.to_vec();
    let mut v = sys.potential(&y);
    obs.sample(0.0, &y, v);
    let out_of_range = |z: &[f64]| !all_finite(z) || norm_inf(z) > BLOWUP_THRESHOLD;

    match integ {
        Integrator::Baseline { method, system } => {
            let mut rhs = Rhs::new(system);
            let mut ws = BaselineWorkspace::new(n);
            let mut z = vec![0.0; n];
            for k in 0..n_steps {
                match method.step_with(&mut rhs, &y, h, &mut z, &mut ws) {
                    Ok(()) => {}
                    Err(Error::NonFinite(_)) => return TrajectoryStatus::Blowup(k),
                    Err(_) => return TrajectoryStatus::StepFailure(k),
                }
                let vz = system.potential(&z);
                if out_of_range(&z) || !vz.is_finite() {
                    return TrajectoryStatus::Blowup(k);
                }
                std::mem::swap(&mut y, &mut z);
                v = vz;
                obs.step(None);
                obs.sample((k + 1) as f64 * h, &y, v);
            }
        }
        Integrator::Implicit(scheme) => {
            let mut ws = Workspace::new(n);
            for k in 0..n_steps {
                let step = scheme.step_with(&y, h, &mut ws);
                if step.diagnostics.status != StepStatus::Converged {
                    return TrajectoryStatus::NewtonFailure(k);
                }
                let vz = sys.potential(&step.state);
                if out_of_range(&step.state) || !vz.is_finite() {
                    return TrajectoryStatus::Blowup(k);
                }
                y = step.state;
                v = vz;
                obs.step(Some(step.diagnostics));
                obs.sample((k + 1) as f64 * h, &y, v);
            }
        }
        Integrator::Explicit1d(scheme) => {
            let mut ws = Workspace::new(1);
            let mut r = [0.0];
            for k in 0..n_steps {
                let z = match scheme.step_explicit_1d(y[0], h) {
                    Ok(z) => z,
                    Err(Error::SingularStep(_)) => return TrajectoryStatus::StepFailure(k),
                    Err(_) => return TrajectoryStatus::Blowup(k),
                };
                let vz = sys.potential(&[z]);
                if out_of_range(&[z]) || !vz.is_finite() {
                    return TrajectoryStatus::Blowup(k);
                }
                let residual_norm = match scheme.residual_into(&y, &[z], h, &mut r, &mut ws) {
                    Ok(()) => r[0].abs(),
                    Err(_) => f64::NAN,
                };
                let diag = StepDiagnostics {
                    newton_iters: 0,
                    residual_norm,
                    delta_v: vz - v,
                    status: StepStatus::Converged,
                };
                y[0] = z;
                v = vz;
                obs.step(Some(diag));
                obs.sample((k + 1) as f64 * h, &y, v);
            }
        }
    }
    TrajectoryStatus::Completed
}

/// Integrates from `y0` with fixed step `h` until `t ≥ t_end`.
///
/// Numerical failures end the trajectory early and are reported through
/// its status; only invalid arguments are errors.
pub fn integrate(integ: &Integrator, y0: &StateVector, h: f64, t_end: f64) -> Result<Trajectory> {
    check_integration_args(integ, y0, h, t_end)?;
    let n_steps = steps_to_reach(t_end, h);
    let mut traj = Trajectory::with_capacity(y0.dim(), h, n_steps + 1);
    if integ.is_discrete_gradient() {
        traj.per_step.reserve(n_steps);
    }
    let status = drive(integ, y0.as_slice(), h, t_end, &mut traj);
    traj.set_status(status);
    Ok(traj)
}

/// Largest one-step increase of `V`: `+∞` for a blown-up trajectory and
/// `−∞` when there are no steps.
pub fn max_lyapunov_increment(traj: &Trajectory) -> f64 {
    if matches!(traj.status(), TrajectoryStatus::Blowup(_)) {
        return f64::INFINITY;
    }
    traj.v_values()
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Ground truth for [`global_error`].
#[derive(Debug, Clone, Copy)]
pub enum Truth<'a> {
    /// The system's closed-form solution from the trajectory's first state.
    Exact(&'a GradientSystem),
    /// A reference whose grid contains every trajectory time.
    Reference(&'a ReferenceTrajectory),
}

/// Mean over samples of `‖y_k − y(t_k)‖∞`.
pub fn global_error(traj: &Trajectory, truth: Truth<'_>) -> Result<f64> {
    if traj.is_empty() {
        return Err(Error::InvalidParameter("empty trajectory".into()));
    }
    let y0 = traj.state(0).to_vec();
    let mut total = 0.0;
    for (k, (&t, y)) in traj.times().iter().zip(traj.states()).enumerate() {
        let err = match truth {
            Truth::Exact(sys) => {
                let exact = sys.exact_solution(t, &y0).ok_or_else(|| {
                    Error::Unsupported(format!("{} has no closed-form solution from this y0", sys.name()))
                })?;
                max_abs_diff(y, &exact)
            }
            Truth::Reference(r) => {
                check_dim(r.samples().dim(), traj.dim())?;
                let exact = r.sample_at(t).ok_or_else(|| {
                    Error::GridMismatch(format!(
                        "sample {k} at t = {t:e} is not on the reference grid (spacing {:e}, end {:e})",
                        r.spacing(),
                        r.samples().times().last().copied().unwrap_or(0.0)
                    ))
                })?;
                max_abs_diff(y, exact)
            }
        };
        total += err;
    }
    Ok(total / traj.len() as f64)
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Least-squares line through `(log h, log error)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderFit {
    pub pairs: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    /// RMS of the fit residuals in log space.
    pub residual: f64,
}

pub const MIN_FIT_PAIRS: usize = 5;

pub fn fit_order(pairs: &[(f64, f64)]) -> Result<OrderFit> {
    if pairs.len() < MIN_FIT_PAIRS {
        return Err(Error::DegenerateFit(format!(
            "need at least {MIN_FIT_PAIRS} pairs, got {}",
            pairs.len()
        )));
    }
    if let Some(&(h, e)) = pairs
        .iter()
        .find(|(h, e)| !(*h > 0.0 && h.is_finite() && *e > 0.0 && e.is_finite()))
    {
        return Err(Error::DegenerateFit(format!("pair ({h:e}, {e:e}) is not positive and finite")));
    }
    let xs: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let m = xs.len() as f64;
    let xm = xs.iter().sum::<f64>() / m;
    let ym = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
    if sxx <= 1e-24 * (1.0 + xm * xm) {
        return Err(Error::DegenerateFit("all step sizes are equal".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let ss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    Ok(OrderFit {
        pairs: pairs.to_vec(),
        slope,
        intercept,
        residual: (ss / m).sqrt(),
    })
}

/// `count` logarithmically spaced values from `lo` to `hi` inclusive.
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..count)
                .map(|i| {
                    if i == 0 {
                        lo
                    } else if i == count - 1 {
                        hi
                    } else {
                        (a + (b - a) * i as f64 / (count - 1) as f64).exp()
                    }
                })
                .collect()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    /// Timed runs per cell; the minimum wall time is reported.
    pub repeats: usize,
    pub dg: DgOptions,
    /// Worker threads; `None` reads [`THREADS_ENV`] or uses every core.
    pub threads: Option<usize>,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            repeats: 3,
            dg: DgOptions::default(),
            threads: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub method: MethodId,
    pub h: f64,
    pub wall_time_s: f64,
    /// `+∞` exactly when the run blew up.
    pub max_delta_v: f64,
    pub status: TrajectoryStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepMetadata {
    pub problem: &'static str,
    pub a: f64,
    pub b: Option<f64>,
    pub y0: Vec<f64>,
    pub t_end: f64,
    pub methods: Vec<MethodId>,
    pub h_list: Vec<f64>,
    pub repeats: usize,
    pub threads: usize,
    pub blowup_threshold: f64,
    pub ltilde: &'static str,
    pub newton_abs_tol: f64,
    pub newton_rel_tol: f64,
    pub newton_max_iters: usize,
    pub version: &'static str,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub metadata: SweepMetadata,
}

/// Number of sweep worker threads from [`THREADS_ENV`], defaulting to the
/// number of available cores.
pub fn sweep_threads() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Runs every `(method, h)` cell, method-major. Cells run concurrently on a
/// dedicated pool, each timed run on a single thread; rows come back in
/// input order regardless of scheduling.
pub fn run_sweep(
    problem: &ProblemSpec,
    y0: &StateVector,
    methods: &[MethodId],
    h_list: &[f64],
    t_end: f64,
    opts: &SweepOptions,
) -> Result<SweepReport> {
    if methods.is_empty() || h_list.is_empty() {
        return Err(Error::InvalidParameter("sweep needs at least one method and one step size".into()));
    }
    if opts.repeats == 0 {
        return Err(Error::InvalidParameter("repeats must be >= 1".into()));
    }
    let integrators = methods
        .iter()
        .map(|m| m.integrator(problem, &opts.dg))
        .collect::<Result<Vec<_>>>()?;
    for integ in &integrators {
        for &h in h_list {
            check_integration_args(integ, y0, h, t_end)?;
        }
    }
    let threads = opts.threads.unwrap_or_else(sweep_threads).max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;

    let cells: Vec<(usize, f64)> = (0..methods.len())
        .flat_map(|i| h_list.iter().map(move |&h| (i, h)))
        .collect();
    let rows = pool.install(|| {
        cells
            .par_iter()
            .map(|&(i, h)| {
                let mut best = f64::INFINITY;
                let mut outcome = None;
                for _ in 0..opts.repeats {
                    let mut s = Summary {
                        last_v: 0.0,
                        max_delta_v: f64::NEG_INFINITY,
                        samples: 0,
                    };
                    let start = Instant::now();
                    let status = drive(&integrators[i], y0.as_slice(), h, t_end, &mut s);
                    best = best.min(start.elapsed().as_secs_f64());
                    outcome = Some((status, s.max_delta_v));
                }
                let (status, max_dv) = outcome.expect("repeats >= 1");
                SweepRow {
                    method: methods[i],
                    h,
                    wall_time_s: best,
                    max_delta_v: if matches!(status, TrajectoryStatus::Blowup(_)) {
                        f64::INFINITY
                    } else {
                        max_dv
                    },
                    status,
                }
            })
            .collect::<Vec<_>>()
    });

    let id = problem.id();
    let metadata = SweepMetadata {
        problem: id.name(),
        a: id.a(),
        b: id.b(),
        y0: y0.as_slice().to_vec(),
        t_end,
        methods: methods.to_vec(),
        h_list: h_list.to_vec(),
        repeats: opts.repeats,
        threads,
        blowup_threshold: BLOWUP_THRESHOLD,
        ltilde: match opts.dg.ltilde {
            LtildeRule::Frozen => "frozen",
            LtildeRule::Midpoint => "midpoint",
        },
        newton_abs_tol: opts.dg.newton.abs_tol,
        newton_rel_tol: opts.dg.newton.rel_tol,
        newton_max_iters: opts.dg.newton.max_iters,
        version: env!("CARGO_PKG_VERSION"),
    };
    Ok(SweepReport { rows, metadata })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_names_round_trip() {
        for m in MethodId::ALL {
            assert_eq!(m.name().parse::<MethodId>().unwrap(), m);
        }
        assert!("rk45".parse::<MethodId>().is_err());
    }

    #[test]
    fn status_display() {
        assert_eq!(TrajectoryStatus::Completed.to_string(), "completed");
        assert_eq!(TrajectoryStatus::Blowup(3).to_string(), "blowup(3)");
        assert_eq!(TrajectoryStatus::NewtonFailure(0).label(), "newton_failure");
    }

    #[test]
    fn log_spacing_endpoints() {
        let h = log_spaced(1e-6, 1e-4, 20);
        assert_eq!(h.len(), 20);
        assert_eq!(h[0], 1e-6);
        assert_eq!(h[19], 1e-4);
        assert!(h.windows(2).all(|w| w[1] > w[0]));
        assert!((h[1] / h[0] - h[19] / h[18]).abs() < 1e-12);
    }

    #[test]
    fn fit_rejects_degenerate_input() {
        let same = vec![(1e-3, 1e-2); 6];
        assert!(matches!(fit_order(&same), Err(Error::DegenerateFit(_))));
        let few = vec![(1e-3, 1e-2), (1e-4, 1e-3)];
        assert!(fit_order(&few).is_err());
        let mut bad: Vec<_> = (1..7).map(|k| (k as f64, k as f64)).collect();
        bad[2].1 = 0.0;
        assert!(fit_order(&bad).is_err());
    }

    #[test]
    fn dg_e_needs_scalar_problem() {
        let d = ProblemSpec::duffing_default();
        assert!(MethodId::DgE.integrator(&d, &DgOptions::default()).is_err());
        let l = ProblemSpec::logistic_v2(10.0).unwrap();
        let integ = MethodId::DgE.integrator(&l, &DgOptions::default()).unwrap();
        assert_eq!(integ.system().name(), "logistic-v1");
        let mid = DgOptions {
            ltilde: LtildeRule::Midpoint,
            ..Default::default()
        };
        assert!(MethodId::DgE.integrator(&l, &mid).is_err());
    }

    #[test]
    fn dg_i_uses_cubic_potential_on_logistic() {
        let l = ProblemSpec::logistic_v1(10.0).unwrap();
        let integ = MethodId::DgI.integrator(&l, &DgOptions::default()).unwrap();
        assert_eq!(integ.system().name(), "logistic-v2");
    }

    #[test]
    fn integrate_rejects_bad_arguments() {
        let spec = ProblemSpec::linear(1.0).unwrap();
        let integ = MethodId::Euler.integrator(&spec, &DgOptions::default()).unwrap();
        let y0 = spec.default_y0();
        assert!(integrate(&integ, y0, 0.0, 1.0).is_err());
        assert!(integrate(&integ, y0, 0.1, 0.05).is_err());
        let wrong = StateVector::from_slice(&[1.0, 2.0]).unwrap();
        assert!(integrate(&integ, &wrong, 0.1, 1.0).is_err());
    }

    #[test]
    fn sweep_rejects_empty_lists() {
        let spec = ProblemSpec::linear(1.0).unwrap();
        let y0 = spec.default_y0();
        let o = SweepOptions::default();
        assert!(run_sweep(&spec, y0, &[], &[0.1], 1.0, &o).is_err());
        assert!(run_sweep(&spec, y0, &[MethodId::Euler], &[], 1.0, &o).is_err());
    }
}
