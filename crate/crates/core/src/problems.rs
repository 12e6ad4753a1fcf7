//! Benchmark systems: scalar linear decay, the logistic equation with two
//! Lyapunov decompositions, and the unforced damped Duffing oscillator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::analysis::{Trajectory, TrajectoryStatus, BLOWUP_THRESHOLD};
use crate::baselines::Rhs;
use crate::error::{Error, Result};
use crate::system::{all_finite, check_dim, norm_inf, GradientSystem, StateVector};

pub const DEFAULT_LINEAR_A: f64 = 1000.0;
pub const DEFAULT_LOGISTIC_A: f64 = 1000.0;
/// Light damping and a stiff restoring force: explicit Euler is unstable for
/// `h ≳ 4e-5` while the trajectory still settles within `T = 10`.
pub const DEFAULT_DUFFING_A: f64 = 0.01;
pub const DEFAULT_DUFFING_B: f64 = 1e5;
pub const DEFAULT_H_REF: f64 = 1e-8;
/// Default cap on stored reference samples.
pub const MAX_REFERENCE_SAMPLES: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "problem", rename_all = "kebab-case")]
pub enum ProblemId {
    /// `y' = −a·y` with `V = ½y²`, `L = −a`.
    Linear { a: f64 },
    /// `y' = a·y(1−y)` with `V = ½(1−y)²`, `L(y) = −a·y`.
    LogisticV1 { a: f64 },
    /// `y' = a·y(1−y)` with `V = −½y² + ⅓y³`, `L = −a`.
    LogisticV2 { a: f64 },
    /// `y₁' = y₂`, `y₂' = y₁ − b·y₁³ − a·y₂` with
    /// `V = ½(y₂² − y₁² + (b/2)·y₁⁴)`, `L = [[0, 1], [−1, −a]]`.
    Duffing { a: f64, b: f64 },
}

impl ProblemId {
    pub fn name(&self) -> &'static str {
        match self {
            ProblemId::Linear { .. } => "linear",
            ProblemId::LogisticV1 { .. } => "logistic-v1",
            ProblemId::LogisticV2 { .. } => "logistic-v2",
            ProblemId::Duffing { .. } => "duffing",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ProblemId::Duffing { .. } => 2,
            _ => 1,
        }
    }

    pub fn a(&self) -> f64 {
        match *self {
            ProblemId::Linear { a }
            | ProblemId::LogisticV1 { a }
            | ProblemId::LogisticV2 { a }
            | ProblemId::Duffing { a, .. } => a,
        }
    }

    pub fn b(&self) -> Option<f64> {
        match *self {
            ProblemId::Duffing { b, .. } => Some(b),
            _ => None,
        }
    }

    pub fn is_logistic(&self) -> bool {
        matches!(self, ProblemId::LogisticV1 { .. } | ProblemId::LogisticV2 { .. })
    }
}

/// A validated problem together with its default initial value.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    id: ProblemId,
    default_y0: StateVector,
}

impl ProblemSpec {
    pub fn new(id: ProblemId) -> Result<Self> {
        let a = id.a();
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidParameter(format!("{}: a must be > 0, got {a}", id.name())));
        }
        if let Some(b) = id.b() {
            if b == 0.0 || !b.is_finite() {
                return Err(Error::InvalidParameter(format!("duffing: b must be non-zero, got {b}")));
            }
        }
        let y0 = match id {
            ProblemId::Duffing { .. } => vec![0.3, 0.0],
            _ => vec![5.0],
        };
        Ok(ProblemSpec {
            id,
            default_y0: StateVector::new(y0)?,
        })
    }

    pub fn linear(a: f64) -> Result<Self> {
        Self::new(ProblemId::Linear { a })
    }

    pub fn logistic_v1(a: f64) -> Result<Self> {
        Self::new(ProblemId::LogisticV1 { a })
    }

    pub fn logistic_v2(a: f64) -> Result<Self> {
        Self::new(ProblemId::LogisticV2 { a })
    }

    pub fn duffing(a: f64, b: f64) -> Result<Self> {
        Self::new(ProblemId::Duffing { a, b })
    }

    pub fn duffing_default() -> Self {
        Self::duffing(DEFAULT_DUFFING_A, DEFAULT_DUFFING_B).expect("valid defaults")
    }

    pub fn id(&self) -> ProblemId {
        self.id
    }

    pub fn name(&self) -> &'static str {
        self.id.name()
    }

    pub fn dim(&self) -> usize {
        self.id.dim()
    }

    pub fn default_y0(&self) -> &StateVector {
        &self.default_y0
    }

    /// Default integration horizon.
    pub fn default_t_end(&self) -> f64 {
        match self.id {
            ProblemId::Duffing { .. } => 10.0,
            _ => 0.05,
        }
    }

    /// Human-readable description of where the decomposition is valid.
    pub fn validity_region(&self) -> &'static str {
        match self.id {
            ProblemId::Linear { .. } => "all y",
            ProblemId::LogisticV1 { .. } => "y > 0 (L(y) = -a*y negative definite)",
            ProblemId::LogisticV2 { .. } => "y > 0 (closed-form solution domain)",
            ProblemId::Duffing { .. } => "all (y1, y2)",
        }
    }

    pub fn contains(&self, y: &StateVector) -> bool {
        y.dim() == self.dim()
            && match self.id {
                ProblemId::LogisticV1 { .. } | ProblemId::LogisticV2 { .. } => y[0] > 0.0,
                _ => true,
            }
    }

    /// Equilibria of the vector field.
    pub fn equilibria(&self) -> Vec<StateVector> {
        let pts: Vec<Vec<f64>> = match self.id {
            ProblemId::Linear { .. } => vec![vec![0.0]],
            ProblemId::LogisticV1 { .. } | ProblemId::LogisticV2 { .. } => vec![vec![0.0], vec![1.0]],
            ProblemId::Duffing { b, .. } => {
                let mut v = vec![vec![0.0, 0.0]];
                if b > 0.0 {
                    let r = (1.0 / b).sqrt();
                    v.push(vec![r, 0.0]);
                    v.push(vec![-r, 0.0]);
                }
                v
            }
        };
        pts.into_iter().map(|p| StateVector::new(p).expect("finite")).collect()
    }
}

/// `count` reproducible points drawn uniformly from a box inside the
/// problem's validity region.
pub fn sample_points(spec: &ProblemSpec, count: usize, seed: u64) -> Vec<StateVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = match spec.id {
        ProblemId::Linear { .. } => (-10.0, 10.0),
        ProblemId::LogisticV1 { .. } | ProblemId::LogisticV2 { .. } => (1e-3, 5.0),
        ProblemId::Duffing { .. } => (-2.0, 2.0),
    };
    (0..count)
        .map(|_| {
            let p = (0..spec.dim()).map(|_| rng.random_range(lo..=hi)).collect();
            StateVector::new(p).expect("finite")
        })
        .collect()
}

/// Builds the gradient system for a problem, including its native right-hand
/// side, closed-form solution (linear and logistic) and equilibria.
pub fn make_problem(spec: &ProblemSpec) -> GradientSystem {
    let builder = match spec.id {
        ProblemId::Linear { a } => GradientSystem::builder("linear", 1)
            .potential(|y| 0.5 * y[0] * y[0])
            .gradient(|y, g| g[0] = y[0])
            .structure(move |_, l| l[(0, 0)] = -a)
            .native_rhs(move |y, f| f[0] = -a * y[0])
            .exact_solution(move |t, y0| Some(vec![y0[0] * (-a * t).exp()])),
        ProblemId::LogisticV1 { a } => GradientSystem::builder("logistic-v1", 1)
            .potential(|y| 0.5 * (1.0 - y[0]) * (1.0 - y[0]))
            .gradient(|y, g| g[0] = y[0] - 1.0)
            .structure(move |y, l| l[(0, 0)] = -a * y[0])
            .native_rhs(move |y, f| f[0] = a * y[0] * (1.0 - y[0]))
            .exact_solution(move |t, y0| logistic_exact(a, t, y0[0]).map(|v| vec![v])),
        ProblemId::LogisticV2 { a } => GradientSystem::builder("logistic-v2", 1)
            .potential(|y| -0.5 * y[0] * y[0] + y[0] * y[0] * y[0] / 3.0)
            .gradient(|y, g| g[0] = y[0] * (y[0] - 1.0))
            .structure(move |_, l| l[(0, 0)] = -a)
            .native_rhs(move |y, f| f[0] = a * y[0] * (1.0 - y[0]))
            .exact_solution(move |t, y0| logistic_exact(a, t, y0[0]).map(|v| vec![v])),
        ProblemId::Duffing { a, b } => GradientSystem::builder("duffing", 2)
            .potential(move |y| 0.5 * (y[1] * y[1] - y[0] * y[0] + 0.5 * b * y[0].powi(4)))
            .gradient(move |y, g| {
                g[0] = -y[0] + b * y[0] * y[0] * y[0];
                g[1] = y[1];
            })
            .structure(move |_, l| {
                l[(0, 0)] = 0.0;
                l[(0, 1)] = 1.0;
                l[(1, 0)] = -1.0;
                l[(1, 1)] = -a;
            })
            .native_rhs(move |y, f| {
                f[0] = y[1];
                f[1] = y[0] - b * y[0] * y[0] * y[0] - a * y[1];
            }),
    };
    let builder = spec
        .equilibria()
        .into_iter()
        .fold(builder, |b, p| b.equilibrium(p.as_slice().to_vec()));
    builder.build().expect("bundled problems are complete")
}

fn logistic_exact(a: f64, t: f64, y0: f64) -> Option<f64> {
    (y0 > 0.0 && t >= 0.0).then(|| 1.0 / (1.0 + (1.0 / y0 - 1.0) * (-a * t).exp()))
}

/// Closed-form solution at time `t ≥ 0`. Duffing has none.
pub fn exact_solution(spec: &ProblemSpec, t: f64, y0: &StateVector) -> Result<StateVector> {
    check_dim(spec.dim(), y0.dim())?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("time must be >= 0, got {t}")));
    }
    match spec.id {
        ProblemId::Linear { a } => StateVector::new(vec![y0[0] * (-a * t).exp()]),
        ProblemId::LogisticV1 { a } | ProblemId::LogisticV2 { a } => {
            let v = logistic_exact(a, t, y0[0]).ok_or_else(|| {
                Error::InvalidParameter(format!("logistic closed form needs y0 > 0, got {}", y0[0]))
            })?;
            StateVector::new(vec![v])
        }
        ProblemId::Duffing { .. } => Err(Error::Unsupported(
            "duffing has no closed-form solution; use a reference trajectory".into(),
        )),
    }
}

/// A fine explicit Euler solution stored every `stride` micro-steps.
#[derive(Debug, Clone)]
pub struct ReferenceTrajectory {
    h_ref: f64,
    stride: usize,
    samples: Trajectory,
}

impl ReferenceTrajectory {
    pub fn h_ref(&self) -> f64 {
        self.h_ref
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    /// Spacing of the stored samples, `stride·h_ref`.
    pub fn spacing(&self) -> f64 {
        self.samples.h()
    }

    pub fn samples(&self) -> &Trajectory {
        &self.samples
    }

    /// Whether `h_ref` is fine enough to serve as truth for step size `h`
    /// (at least four orders of magnitude smaller).
    pub fn resolves(&self, h: f64) -> bool {
        self.h_ref <= 1e-4 * h * (1.0 + 1e-12)
    }

    /// State at `t` if `t` lies (to rounding) on the stored grid.
    pub fn sample_at(&self, t: f64) -> Option<&[f64]> {
        let x = t / self.spacing();
        let k = x.round();
        if k < 0.0 || (x - k).abs() > 1e-6 || k as usize >= self.samples.len() {
            return None;
        }
        Some(self.samples.state(k as usize))
    }
}

/// Integrates `system` from `y0` to `t_end` with explicit Euler at step
/// `h_ref`, keeping every `stride`-th state. `None` picks the smallest stride
/// that stores at most [`MAX_REFERENCE_SAMPLES`] samples.
///
/// The number of micro-steps is rounded up to a whole number of strides, so
/// the last sample sits at or just past `t_end`.
pub fn reference_trajectory(
    system: &GradientSystem,
    y0: &StateVector,
    t_end: f64,
    h_ref: f64,
    stride: Option<usize>,
) -> Result<ReferenceTrajectory> {
    check_dim(system.dim(), y0.dim())?;
    if !(h_ref > 0.0 && h_ref.is_finite()) {
        return Err(Error::InvalidParameter(format!("h_ref must be > 0, got {h_ref}")));
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidParameter(format!("t_end must be >= 0, got {t_end}")));
    }
    let micro_steps = steps_to_reach(t_end, h_ref);
    let stride = match stride {
        Some(0) => return Err(Error::InvalidParameter("stride must be >= 1".into())),
        Some(s) => s,
        None => micro_steps.div_ceil(MAX_REFERENCE_SAMPLES - 1).max(1),
    };
    let n_out = micro_steps.div_ceil(stride);
    let n = system.dim();
    let spacing = stride as f64 * h_ref;

    let mut samples = Trajectory::with_capacity(n, spacing, n_out + 1);
    samples.push_sample(0.0, y0.as_slice(), system.potential(y0.as_slice()));
    let mut rhs = Rhs::new(system);
    let mut y = y0.as_slice().to_vec();
    let mut f = vec![0.0; n];
    for k in 1..=n_out {
        for _ in 0..stride {
            rhs.eval(&y, &mut f);
            for i in 0..n {
                y[i] += h_ref * f[i];
            }
        }
        if !all_finite(&y) || norm_inf(&y) > BLOWUP_THRESHOLD {
            return Err(Error::InvalidReference(format!(
                "explicit Euler at h_ref = {h_ref:e} blew up before t = {:e}",
                k as f64 * spacing
            )));
        }
        samples.push_sample(k as f64 * spacing, &y, system.potential(&y));
    }
    samples.set_status(TrajectoryStatus::Completed);
    Ok(ReferenceTrajectory {
        h_ref,
        stride,
        samples,
    })
}

/// Number of steps of size `h` needed for `k·h ≥ t_end`, ignoring rounding
/// noise in `t_end / h`.
pub(crate) fn steps_to_reach(t_end: f64, h: f64) -> usize {
    let x = t_end / h;
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.max(1.0) {
        r as usize
    } else {
        x.ceil() as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameter_validation() {
        assert!(ProblemSpec::linear(0.0).is_err());
        assert!(ProblemSpec::logistic_v1(-1.0).is_err());
        assert!(ProblemSpec::logistic_v2(f64::NAN).is_err());
        assert!(ProblemSpec::duffing(1.0, 0.0).is_err());
        assert!(ProblemSpec::duffing(0.0, 1.0).is_err());
        assert!(ProblemSpec::duffing(1.0, -1.0).is_ok());
    }

    #[test]
    fn defaults_inside_region() {
        for spec in [
            ProblemSpec::linear(2.0).unwrap(),
            ProblemSpec::logistic_v1(2.0).unwrap(),
            ProblemSpec::logistic_v2(2.0).unwrap(),
            ProblemSpec::duffing_default(),
        ] {
            assert!(spec.contains(spec.default_y0()), "{}", spec.name());
        }
    }

    #[test]
    fn step_count_rounding() {
        assert_eq!(steps_to_reach(0.05, 7e-4), 72);
        assert_eq!(steps_to_reach(10.0, 1e-3), 10_000);
        assert_eq!(steps_to_reach(0.005, 1e-6), 5_000);
        assert_eq!(steps_to_reach(0.0, 1e-3), 0);
        assert_eq!(steps_to_reach(1e-3, 1e-3), 1);
    }

    #[test]
    fn exact_rejects_bad_input() {
        let spec = ProblemSpec::logistic_v2(1000.0).unwrap();
        let neg = StateVector::from_slice(&[-1.0]).unwrap();
        assert!(exact_solution(&spec, 0.1, &neg).is_err());
        let y0 = StateVector::from_slice(&[5.0]).unwrap();
        assert!(exact_solution(&spec, -0.1, &y0).is_err());
        let d = ProblemSpec::duffing_default();
        assert!(matches!(
            exact_solution(&d, 1.0, d.default_y0()),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn samples_are_reproducible_and_in_region() {
        let spec = ProblemSpec::logistic_v1(3.0).unwrap();
        let a = sample_points(&spec, 50, 9);
        assert_eq!(a, sample_points(&spec, 50, 9));
        assert_ne!(a, sample_points(&spec, 50, 10));
        assert!(a.iter().all(|p| spec.contains(p)));
    }

    #[test]
    fn reference_stride_and_grid() {
        let spec = ProblemSpec::linear(1.0).unwrap();
        let sys = make_problem(&spec);
        let r = reference_trajectory(&sys, spec.default_y0(), 1.0, 1e-3, Some(10)).unwrap();
        assert_eq!(r.samples().len(), 101);
        assert!((r.spacing() - 1e-2).abs() < 1e-15);
        assert!(r.sample_at(0.5).is_some());
        assert!(r.sample_at(0.505).is_none());
        assert!(r.sample_at(2.0).is_none());
        assert!(reference_trajectory(&sys, spec.default_y0(), 1.0, 1e-3, Some(0)).is_err());
    }

    #[test]
    fn reference_blowup_is_an_error() {
        let spec = ProblemSpec::linear(1000.0).unwrap();
        let sys = make_problem(&spec);
        let r = reference_trajectory(&sys, spec.default_y0(), 1.0, 1e-2, None);
        assert!(matches!(r, Err(Error::InvalidReference(_))));
    }
}
