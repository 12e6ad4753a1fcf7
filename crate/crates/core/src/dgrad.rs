//! Discrete gradients and the implicit discrete gradient stepper.
//!
//! One step solves `z = y + h·L̃(y,z)·∇̄V(y,z)` for `z`. Because the
//! discrete gradient satisfies `∇̄V(y,z)·(z−y) = V(z) − V(y)`, any solution
//! obeys `V(z) − V(y) = h·∇̄Vᵀ L̃ ∇̄V`, which is non-positive whenever the
//! symmetric part of `L̃` is negative semidefinite, whatever the step size.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::system::{all_finite, check_dim, mat_vec, norm_inf, GradientSystem, StateVector};

/// Which discrete gradient to use.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DiscreteGradientKind {
    /// Coordinate-increment (Itoh-Abe) gradient. Coordinates are advanced
    /// from `y` to `z` one at a time, in `ordering`.
    ItohAbe { ordering: Vec<usize> },
    /// `(V(z) − V(y)) / (z − y)`, the only discrete gradient in one dimension.
    Exact1d,
}

impl DiscreteGradientKind {
    /// Itoh-Abe with the natural ordering `0, 1, …, n−1`.
    pub fn itoh_abe(n: usize) -> Self {
        DiscreteGradientKind::ItohAbe {
            ordering: (0..n).collect(),
        }
    }

    pub fn itoh_abe_with_ordering(ordering: Vec<usize>) -> Result<Self> {
        let n = ordering.len();
        let mut seen = vec![false; n];
        for &i in &ordering {
            if i >= n || seen[i] {
                return Err(Error::InvalidParameter(format!(
                    "ordering {ordering:?} is not a permutation of 0..{n}"
                )));
            }
            seen[i] = true;
        }
        Ok(DiscreteGradientKind::ItohAbe { ordering })
    }

    fn check_compatible(&self, dim: usize) -> Result<()> {
        match self {
            DiscreteGradientKind::Exact1d if dim != 1 => Err(Error::InvalidParameter(format!(
                "exact 1-D discrete gradient needs n = 1, system has n = {dim}"
            ))),
            DiscreteGradientKind::ItohAbe { ordering } if ordering.len() != dim => {
                Err(Error::DimensionMismatch {
                    expected: dim,
                    got: ordering.len(),
                })
            }
            _ => Ok(()),
        }
    }
}

/// Approximation `L̃(y, z)` of the structure matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LtildeRule {
    /// `L̃(y,z) = L(y)`
    #[default]
    Frozen,
    /// `L̃(y,z) = L((y+z)/2)`
    Midpoint,
}

/// Starting guess for the Newton iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Predictor {
    /// `z₀ = y`
    #[default]
    Identity,
    /// `z₀ = y + h·f(y)`
    Euler,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_iters: usize,
    /// Fixed finite-difference step for the Jacobian. `None` uses
    /// `√ε·(1+|z_j|)` per column.
    pub fd_jacobian_step: Option<f64>,
    pub predictor: Predictor,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        NewtonConfig {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            max_iters: 50,
            fd_jacobian_step: None,
            predictor: Predictor::Identity,
        }
    }
}

impl NewtonConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::InvalidParameter("Newton tolerances must be > 0".into()));
        }
        if self.max_iters < 1 {
            return Err(Error::InvalidParameter("Newton max_iters must be >= 1".into()));
        }
        if let Some(s) = self.fd_jacobian_step {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::InvalidParameter("Jacobian step must be > 0".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepStatus {
    Converged,
    MaxIters,
    NonFinite,
    SingularJacobian,
}

impl StepStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            StepStatus::Converged => "converged",
            StepStatus::MaxIters => "max_iters",
            StepStatus::NonFinite => "non_finite",
            StepStatus::SingularJacobian => "singular_jacobian",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDiagnostics {
    pub newton_iters: usize,
    pub residual_norm: f64,
    /// `V(z) − V(y)`
    pub delta_v: f64,
    pub status: StepStatus,
}

/// Result of one implicit step. `state` is the last Newton iterate; it is
/// only a valid next state when the status is [`StepStatus::Converged`].
#[derive(Debug, Clone, PartialEq)]
pub struct DgStep {
    pub state: Vec<f64>,
    pub diagnostics: StepDiagnostics,
}

impl DgStep {
    pub fn converged(&self) -> bool {
        self.diagnostics.status == StepStatus::Converged
    }

    pub fn into_state(self) -> Option<StateVector> {
        if self.converged() {
            StateVector::new(self.state).ok()
        } else {
            None
        }
    }
}

pub const DEFAULT_DEGENERATE_THRESHOLD: f64 = 1e-12;

/// Extra simplified-Newton corrections tried after the tolerance is met.
const POLISH_STEPS: usize = 2;

/// Residuals within this multiple of the estimated rounding noise of the
/// residual evaluation count as converged. Near a minimum of V the
/// difference quotients lose digits to cancellation, so a fixed tolerance
/// can sit below what the residual can resolve.
const NOISE_FACTOR: f64 = 16.0;

/// A difference quotient whose numerator carries more relative rounding
/// error than this is replaced by the segment average of the partial
/// derivative (see [`DgScheme::discrete_gradient`]).
const CANCELLATION_LIMIT: f64 = 1e-10;

/// 3-point Gauss-Legendre nodes on [0, 1] and weights.
const GL_NODES: [f64; 3] = [0.112_701_665_379_258_31, 0.5, 0.887_298_334_620_741_7];
const GL_WEIGHTS: [f64; 3] = [5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0];

/// A discrete gradient method: system, discrete gradient, `L̃` rule and
/// Newton settings. Immutable; stepping is reentrant.
#[derive(Debug, Clone)]
pub struct DgScheme {
    system: GradientSystem,
    kind: DiscreteGradientKind,
    ltilde: LtildeRule,
    newton: NewtonConfig,
    degenerate_threshold: f64,
    quadratic_coeff: Option<f64>,
}

impl DgScheme {
    /// Default scheme: exact 1-D gradient for scalar systems, Itoh-Abe with
    /// natural ordering otherwise; frozen `L̃`; default Newton settings.
    pub fn new(system: GradientSystem) -> Self {
        let kind = if system.dim() == 1 {
            DiscreteGradientKind::Exact1d
        } else {
            DiscreteGradientKind::itoh_abe(system.dim())
        };
        let quadratic_coeff = if system.dim() == 1 {
            quadratic_coefficient_1d(&system)
        } else {
            None
        };
        DgScheme {
            system,
            kind,
            ltilde: LtildeRule::Frozen,
            newton: NewtonConfig::default(),
            degenerate_threshold: DEFAULT_DEGENERATE_THRESHOLD,
            quadratic_coeff,
        }
    }

    /// A scheme for the closed-form path of [`DgScheme::step_explicit_1d`].
    /// Fails unless the system is scalar with a quadratic potential.
    pub fn explicit_1d(system: GradientSystem) -> Result<Self> {
        if system.dim() != 1 {
            return Err(Error::Unsupported(format!(
                "explicit discrete gradient step needs n = 1, {} has n = {}",
                system.name(),
                system.dim()
            )));
        }
        let scheme = DgScheme::new(system);
        if scheme.quadratic_coeff.is_none() {
            return Err(Error::NotQuadratic(scheme.system.name().to_string()));
        }
        Ok(scheme)
    }

    pub fn with_kind(mut self, kind: DiscreteGradientKind) -> Result<Self> {
        kind.check_compatible(self.system.dim())?;
        self.kind = kind;
        Ok(self)
    }

    pub fn with_ltilde(mut self, rule: LtildeRule) -> Self {
        self.ltilde = rule;
        self
    }

    pub fn with_newton(mut self, cfg: NewtonConfig) -> Result<Self> {
        cfg.validate()?;
        self.newton = cfg;
        Ok(self)
    }

    pub fn with_degenerate_threshold(mut self, tau: f64) -> Result<Self> {
        if !(tau >= 0.0 && tau.is_finite()) {
            return Err(Error::InvalidParameter("degenerate threshold must be >= 0".into()));
        }
        self.degenerate_threshold = tau;
        Ok(self)
    }

    pub fn system(&self) -> &GradientSystem {
        &self.system
    }

    pub fn kind(&self) -> &DiscreteGradientKind {
        &self.kind
    }

    pub fn ltilde(&self) -> LtildeRule {
        self.ltilde
    }

    pub fn newton(&self) -> &NewtonConfig {
        &self.newton
    }

    pub fn degenerate_threshold(&self) -> f64 {
        self.degenerate_threshold
    }

    /// Whether the closed-form explicit step is available.
    pub fn supports_explicit_1d(&self) -> bool {
        self.quadratic_coeff.is_some() && self.ltilde == LtildeRule::Frozen
    }

    /// `∇̄V(y, z)`.
    ///
    /// Component `i` is the difference quotient of `V` along the `i`-th leg
    /// of the coordinate path from `y` to `z`. Two guards handle rounding:
    /// when `|z_i − y_i| ≤ τ(1+|y_i|)` the exact partial at the start of the
    /// leg is used; when the quotient's numerator is dominated by
    /// cancellation, the partial is averaged over the leg by Gauss-Legendre
    /// quadrature instead, which equals the quotient exactly for polynomial
    /// potentials of degree ≤ 6 and to high order otherwise.
    pub fn discrete_gradient(&self, y: &StateVector, z: &StateVector) -> Result<StateVector> {
        let n = self.system.dim();
        check_dim(n, y.dim())?;
        check_dim(n, z.dim())?;
        let mut ws = Workspace::new(n);
        let mut out = vec![0.0; n];
        self.dg_into(y.as_slice(), z.as_slice(), &mut out, &mut ws)?;
        StateVector::new(out)
    }

    /// `F(z) = z − y − h·L̃(y,z)·∇̄V(y,z)`
    pub fn residual(&self, y: &StateVector, z: &StateVector, h: f64) -> Result<Vec<f64>> {
        let n = self.system.dim();
        check_dim(n, y.dim())?;
        check_dim(n, z.dim())?;
        check_step_size(h)?;
        let mut ws = Workspace::new(n);
        let mut out = vec![0.0; n];
        self.residual_into(y.as_slice(), z.as_slice(), h, &mut out, &mut ws)?;
        Ok(out)
    }

    /// Advances `y` by one step of size `h`, solving the implicit equation
    /// with Newton's method and a forward-difference Jacobian.
    pub fn step(&self, y: &StateVector, h: f64) -> Result<DgStep> {
        check_dim(self.system.dim(), y.dim())?;
        check_step_size(h)?;
        let mut ws = Workspace::new(self.system.dim());
        Ok(self.step_with(y.as_slice(), h, &mut ws))
    }

    /// Closed-form step for scalar systems with quadratic `V` and frozen `L̃`.
    ///
    /// With `V` quadratic the discrete gradient is affine in `z`, so the
    /// scheme reduces to `z = y + h·L(y)·V'(y) / (1 − h·L(y)·c₂)` where `c₂`
    /// is the quadratic coefficient of `V`.
    pub fn step_explicit_1d(&self, y: f64, h: f64) -> Result<f64> {
        if self.system.dim() != 1 {
            return Err(Error::Unsupported("explicit step needs a scalar system".into()));
        }
        if self.ltilde != LtildeRule::Frozen {
            return Err(Error::Unsupported("explicit step needs frozen L̃".into()));
        }
        check_step_size(h)?;
        if !y.is_finite() {
            return Err(Error::NonFinite("state"));
        }
        let c2 = self
            .quadratic_coeff
            .ok_or_else(|| Error::NotQuadratic(self.system.name().to_string()))?;
        let l = self.system.structure(&[y])[(0, 0)];
        let mut g = [0.0];
        self.system.gradient_into(&[y], &mut g);
        let hl = h * l;
        let denom = 1.0 - hl * c2;
        if denom.abs() <= 4.0 * f64::EPSILON * (1.0 + (hl * c2).abs()) {
            return Err(Error::SingularStep(denom));
        }
        let z = y + hl * g[0] / denom;
        if !z.is_finite() {
            return Err(Error::NonFinite("explicit step"));
        }
        Ok(z)
    }

    pub(crate) fn step_with(&self, y: &[f64], h: f64, ws: &mut Workspace) -> DgStep {
        let n = y.len();
        let cfg = &self.newton;
        let tol = cfg.abs_tol + cfg.rel_tol * norm_inf(y);
        let v_y = self.system.potential(y);

        let mut z = y.to_vec();
        if cfg.predictor == Predictor::Euler {
            let mut f = vec![0.0; n];
            self.system.evaluator().eval(y, &mut f);
            if all_finite(&f) {
                for i in 0..n {
                    z[i] += h * f[i];
                }
            }
        }

        let fail = |z: Vec<f64>, iters, rn, status| DgStep {
            state: z,
            diagnostics: StepDiagnostics {
                newton_iters: iters,
                residual_norm: rn,
                delta_v: f64::NAN,
                status,
            },
        };

        let mut r = vec![0.0; n];
        if self.residual_into(y, &z, h, &mut r, ws).is_err() || !all_finite(&r) {
            return fail(z, 0, f64::NAN, StepStatus::NonFinite);
        }
        let mut rn = norm_inf(&r);
        let mut iters = 0;
        let mut lu = None;
        while rn > tol && rn > NOISE_FACTOR * self.noise_floor(y, &z, h, ws) {
            if iters >= cfg.max_iters {
                return fail(z, iters, rn, StepStatus::MaxIters);
            }
            let jac = match self.jacobian(y, &z, h, &r, ws) {
                Some(j) => j,
                None => return fail(z, iters, rn, StepStatus::NonFinite),
            };
            let factor = jac.lu();
            let dz = match factor.solve(&nalgebra::DVector::from_column_slice(&r)) {
                Some(dz) if all_finite(dz.as_slice()) => dz,
                _ => return fail(z, iters, rn, StepStatus::SingularJacobian),
            };
            lu = Some(factor);
            for i in 0..n {
                z[i] -= dz[i];
            }
            iters += 1;
            if self.residual_into(y, &z, h, &mut r, ws).is_err() || !all_finite(&r) {
                return fail(z, iters, f64::NAN, StepStatus::NonFinite);
            }
            rn = norm_inf(&r);
        }

        // The decrease identity holds up to the size of the residual, so try
        // to push it down to roundoff with the last Jacobian. An iterate
        // that never left `y` leaves V unchanged and is kept as is.
        if rn > 0.0 && z != y {
            if lu.is_none() {
                lu = self.jacobian(y, &z, h, &r, ws).map(|j| j.lu());
            }
            if let Some(factor) = &lu {
                let mut zc = vec![0.0; n];
                let mut rc = vec![0.0; n];
                for _ in 0..POLISH_STEPS {
                    let Some(dz) = factor.solve(&nalgebra::DVector::from_column_slice(&r)) else {
                        break;
                    };
                    for i in 0..n {
                        zc[i] = z[i] - dz[i];
                    }
                    if self.residual_into(y, &zc, h, &mut rc, ws).is_err() || !all_finite(&rc) {
                        break;
                    }
                    let rcn = norm_inf(&rc);
                    if rcn < rn {
                        std::mem::swap(&mut z, &mut zc);
                        std::mem::swap(&mut r, &mut rc);
                        rn = rcn;
                        iters += 1;
                        if rn == 0.0 {
                            break;
                        }
                    } else {
                        break;
                    }
                }
            }
        }

        let v_z = self.system.potential(&z);
        let status = if all_finite(&z) && v_z.is_finite() {
            StepStatus::Converged
        } else {
            StepStatus::NonFinite
        };
        DgStep {
            state: z,
            diagnostics: StepDiagnostics {
                newton_iters: iters,
                residual_norm: rn,
                delta_v: v_z - v_y,
                status,
            },
        }
    }

    fn jacobian(&self, y: &[f64], z: &[f64], h: f64, r: &[f64], ws: &mut Workspace) -> Option<DMatrix<f64>> {
        let n = y.len();
        let mut jac = DMatrix::zeros(n, n);
        let mut zp = z.to_vec();
        let mut rp = vec![0.0; n];
        for j in 0..n {
            let step = self
                .newton
                .fd_jacobian_step
                .unwrap_or_else(|| f64::EPSILON.sqrt() * (1.0 + z[j].abs()));
            zp[j] = z[j] + step;
            let dz = zp[j] - z[j];
            self.residual_into(y, &zp, h, &mut rp, ws).ok()?;
            zp[j] = z[j];
            for i in 0..n {
                jac[(i, j)] = (rp[i] - r[i]) / dz;
            }
        }
        all_finite(jac.as_slice()).then_some(jac)
    }

    pub(crate) fn residual_into(&self, y: &[f64], z: &[f64], h: f64, out: &mut [f64], ws: &mut Workspace) -> Result<()> {
        let mut dg = std::mem::take(&mut ws.dg);
        let res = self.dg_into(y, z, &mut dg, ws);
        if res.is_ok() {
            self.ltilde_into(y, z, ws);
            mat_vec(&ws.lt, &dg, out);
            for i in 0..y.len() {
                out[i] = z[i] - y[i] - h * out[i];
            }
        }
        ws.dg = dg;
        res
    }

    /// Rounding-noise scale of the residual most recently evaluated at `z`.
    fn noise_floor(&self, y: &[f64], z: &[f64], h: f64, ws: &Workspace) -> f64 {
        let n = y.len();
        let mut worst = 0.0f64;
        for i in 0..n {
            let mut e = f64::EPSILON * (z[i].abs() + y[i].abs());
            for j in 0..n {
                e += h * ws.lt[(i, j)].abs() * ws.noise[j];
            }
            worst = worst.max(e);
        }
        worst
    }

    /// Slope of V along coordinate `i` from `a` to `b`, starting at
    /// `ws.path` (whose `i`-th entry is `a`), and its rounding-noise scale.
    fn leg_slope(&self, i: usize, a: f64, b: f64, va: f64, vb: f64, ws: &mut Workspace) -> (f64, f64) {
        let d = b - a;
        let diff = vb - va;
        let rounding = f64::EPSILON * (va.abs() + vb.abs());
        if rounding <= CANCELLATION_LIMIT * diff.abs() || !va.is_finite() || !vb.is_finite() {
            return (diff / d, rounding / d.abs());
        }
        let mut avg = 0.0;
        let mut mag = 0.0;
        for (s, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
            ws.path[i] = a + s * d;
            self.system.gradient_into(&ws.path, &mut ws.grad);
            avg += w * ws.grad[i];
            mag += w * ws.grad[i].abs();
        }
        ws.path[i] = a;
        (avg, 4.0 * f64::EPSILON * mag)
    }

    fn ltilde_into(&self, y: &[f64], z: &[f64], ws: &mut Workspace) {
        match self.ltilde {
            LtildeRule::Frozen => self.system.structure_into(y, &mut ws.lt),
            LtildeRule::Midpoint => {
                for i in 0..y.len() {
                    ws.mid[i] = 0.5 * (y[i] + z[i]);
                }
                self.system.structure_into(&ws.mid, &mut ws.lt);
            }
        }
    }

    fn dg_into(&self, y: &[f64], z: &[f64], out: &mut [f64], ws: &mut Workspace) -> Result<()> {
        let tau = self.degenerate_threshold;
        let sys = &self.system;
        match &self.kind {
            DiscreteGradientKind::Exact1d => {
                let d = z[0] - y[0];
                if d.abs() <= tau * (1.0 + y[0].abs()) {
                    sys.gradient_into(y, out);
                    ws.noise[0] = f64::EPSILON * out[0].abs();
                } else {
                    let (vz, vy) = (sys.potential(z), sys.potential(y));
                    if !(vz.is_finite() && vy.is_finite()) {
                        return Err(Error::NonFinite("potential"));
                    }
                    ws.path[0] = y[0];
                    (out[0], ws.noise[0]) = self.leg_slope(0, y[0], z[0], vy, vz, ws);
                }
            }
            DiscreteGradientKind::ItohAbe { ordering } => {
                ws.path.copy_from_slice(y);
                let mut v_prev = sys.potential(&ws.path);
                if !v_prev.is_finite() {
                    return Err(Error::NonFinite("potential"));
                }
                for &i in ordering {
                    let d = z[i] - y[i];
                    if d.abs() <= tau * (1.0 + y[i].abs()) {
                        // analytic limit of the quotient at the current path point
                        sys.gradient_into(&ws.path, &mut ws.grad);
                        out[i] = ws.grad[i];
                        ws.noise[i] = f64::EPSILON * out[i].abs();
                        if d != 0.0 {
                            ws.path[i] = z[i];
                            v_prev = sys.potential(&ws.path);
                        }
                    } else {
                        ws.path[i] = z[i];
                        let v_next = sys.potential(&ws.path);
                        ws.path[i] = y[i];
                        (out[i], ws.noise[i]) = self.leg_slope(i, y[i], z[i], v_prev, v_next, ws);
                        ws.path[i] = z[i];
                        v_prev = v_next;
                    }
                    if !v_prev.is_finite() {
                        return Err(Error::NonFinite("potential"));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Scratch buffers reused across residual evaluations.
pub(crate) struct Workspace {
    path: Vec<f64>,
    grad: Vec<f64>,
    dg: Vec<f64>,
    mid: Vec<f64>,
    /// Rounding-noise estimate of each discrete gradient component.
    noise: Vec<f64>,
    lt: DMatrix<f64>,
}

impl Workspace {
    pub(crate) fn new(n: usize) -> Self {
        Workspace {
            path: vec![0.0; n],
            grad: vec![0.0; n],
            dg: vec![0.0; n],
            mid: vec![0.0; n],
            noise: vec![0.0; n],
            lt: DMatrix::zeros(n, n),
        }
    }
}

fn check_step_size(h: f64) -> Result<()> {
    if h > 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("step size must be > 0, got {h}")))
    }
}

/// Returns `c₂` if `V` is quadratic, judged by vanishing third differences
/// at a handful of sample points.
fn quadratic_coefficient_1d(system: &GradientSystem) -> Option<f64> {
    let v = |x: f64| system.potential(&[x]);
    let delta = 0.5;
    for &s in &[-1.5, -0.25, 0.5, 1.75] {
        let vals = [v(s), v(s + delta), v(s + 2.0 * delta), v(s + 3.0 * delta)];
        if !all_finite(&vals) {
            return None;
        }
        let third = vals[3] - 3.0 * vals[2] + 3.0 * vals[1] - vals[0];
        let scale = 1.0 + vals.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if third.abs() > 1e-9 * scale {
            return None;
        }
    }
    // V' is affine, so a unit difference recovers 2·c₂ exactly
    let g = |x: f64| system.gradient(&[x])[0];
    let c2 = 0.25 * (g(1.0) - g(-1.0));
    c2.is_finite().then_some(c2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half_norm_sq(n: usize) -> GradientSystem {
        GradientSystem::builder("half-norm-sq", n)
            .potential(|y| 0.5 * y.iter().map(|v| v * v).sum::<f64>())
            .gradient(|y, g| g.copy_from_slice(y))
            .structure(|_, l| {
                l.fill_with_identity();
                l.neg_mut();
            })
            .build()
            .unwrap()
    }

    fn sv(v: &[f64]) -> StateVector {
        StateVector::from_slice(v).unwrap()
    }

    #[test]
    fn quotient_on_quadratic_bowl() {
        let s = DgScheme::new(half_norm_sq(2));
        let g = s.discrete_gradient(&sv(&[0.0, 0.0]), &sv(&[2.0, 2.0])).unwrap();
        assert_eq!(g.as_slice(), &[1.0, 1.0]);
    }

    #[test]
    fn coincident_points_give_gradient() {
        let s = DgScheme::new(half_norm_sq(2));
        let y = sv(&[1.0, 2.0]);
        let g = s.discrete_gradient(&y, &y).unwrap();
        assert_eq!(g.as_slice(), &[1.0, 2.0]);
    }

    #[test]
    fn ordering_must_be_permutation() {
        assert!(DiscreteGradientKind::itoh_abe_with_ordering(vec![1, 0, 2]).is_ok());
        assert!(DiscreteGradientKind::itoh_abe_with_ordering(vec![0, 0]).is_err());
        assert!(DiscreteGradientKind::itoh_abe_with_ordering(vec![0, 2]).is_err());
    }

    #[test]
    fn kind_compatibility_enforced() {
        let s = DgScheme::new(half_norm_sq(2));
        assert!(s.clone().with_kind(DiscreteGradientKind::Exact1d).is_err());
        assert!(s.with_kind(DiscreteGradientKind::itoh_abe(3)).is_err());
    }

    #[test]
    fn newton_config_validation() {
        let s = DgScheme::new(half_norm_sq(1));
        let bad = NewtonConfig {
            max_iters: 0,
            ..Default::default()
        };
        assert!(s.clone().with_newton(bad).is_err());
        let bad = NewtonConfig {
            abs_tol: 0.0,
            ..Default::default()
        };
        assert!(s.with_newton(bad).is_err());
    }

    #[test]
    fn rejects_bad_step_size_and_dimension() {
        let s = DgScheme::new(half_norm_sq(2));
        assert!(s.step(&sv(&[1.0, 1.0]), 0.0).is_err());
        assert!(s.step(&sv(&[1.0, 1.0]), -1.0).is_err());
        assert!(matches!(
            s.step(&sv(&[1.0]), 0.1),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn bowl_step_is_trapezoidal() {
        // V = ½‖y‖², L = −I: z = y(2 − h)/(2 + h) componentwise
        let s = DgScheme::new(half_norm_sq(2));
        let out = s.step(&sv(&[1.0, -3.0]), 0.5).unwrap();
        assert!(out.converged());
        let k = 1.5 / 2.5;
        assert!((out.state[0] - k).abs() < 1e-14);
        assert!((out.state[1] + 3.0 * k).abs() < 1e-14);
        assert!(out.diagnostics.delta_v < 0.0);
    }

    #[test]
    fn max_iters_reported() {
        let cfg = NewtonConfig {
            max_iters: 1,
            abs_tol: 1e-300,
            rel_tol: 1e-300,
            ..Default::default()
        };
        let cubic = GradientSystem::builder("quartic", 1)
            .potential(|y| 0.25 * y[0].powi(4))
            .gradient(|y, g| g[0] = y[0].powi(3))
            .structure(|_, l| l[(0, 0)] = -1.0)
            .build()
            .unwrap();
        let s = DgScheme::new(cubic).with_newton(cfg).unwrap();
        let out = s.step(&sv(&[2.0]), 1.0).unwrap();
        assert_eq!(out.diagnostics.status, StepStatus::MaxIters);
        assert_eq!(out.diagnostics.newton_iters, 1);
        assert!(out.into_state().is_none());
    }

    #[test]
    fn explicit_path_needs_quadratic_scalar() {
        let cubic = GradientSystem::builder("cubic", 1)
            .potential(|y| y[0].powi(3) / 3.0)
            .gradient(|y, g| g[0] = y[0] * y[0])
            .structure(|_, l| l[(0, 0)] = -1.0)
            .build()
            .unwrap();
        assert!(matches!(DgScheme::explicit_1d(cubic.clone()), Err(Error::NotQuadratic(_))));
        assert!(matches!(
            DgScheme::new(cubic).step_explicit_1d(1.0, 0.1),
            Err(Error::NotQuadratic(_))
        ));
        assert!(matches!(
            DgScheme::explicit_1d(half_norm_sq(2)),
            Err(Error::Unsupported(_))
        ));
        let midpoint = DgScheme::explicit_1d(half_norm_sq(1))
            .unwrap()
            .with_ltilde(LtildeRule::Midpoint);
        assert!(matches!(
            midpoint.step_explicit_1d(1.0, 0.1),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn explicit_path_singular_denominator() {
        // V = ½y², L = 1: denominator 1 − h·1·½ vanishes at h = 2
        let sys = GradientSystem::builder("unstable", 1)
            .potential(|y| 0.5 * y[0] * y[0])
            .gradient(|y, g| g[0] = y[0])
            .structure(|_, l| l[(0, 0)] = 1.0)
            .build()
            .unwrap();
        let s = DgScheme::explicit_1d(sys).unwrap();
        assert!(matches!(s.step_explicit_1d(1.0, 2.0), Err(Error::SingularStep(_))));
    }

    #[test]
    fn midpoint_ltilde_consistent_at_coincident_points() {
        let sys = GradientSystem::builder("state-dependent", 1)
            .potential(|y| 0.5 * y[0] * y[0])
            .gradient(|y, g| g[0] = y[0])
            .structure(|y, l| l[(0, 0)] = -(1.0 + y[0] * y[0]))
            .build()
            .unwrap();
        let frozen = DgScheme::new(sys.clone());
        let mid = DgScheme::new(sys).with_ltilde(LtildeRule::Midpoint);
        let y = sv(&[0.7]);
        let r1 = frozen.residual(&y, &y, 0.3).unwrap();
        let r2 = mid.residual(&y, &y, 0.3).unwrap();
        assert_eq!(r1, r2);
        let step = mid.step(&y, 0.3).unwrap();
        assert!(step.converged());
        assert!(step.diagnostics.delta_v < 0.0);
    }
}
