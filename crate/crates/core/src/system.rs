//! Gradient systems in linear-gradient form `dy/dt = L(y) ∇V(y)`.
//!
//! A [`GradientSystem`] bundles a Lyapunov candidate `V`, its gradient, and
//! the structure matrix field `L`. The vector field is always derived as
//! `L(y)·∇V(y)`; a system may additionally carry the right-hand side in the
//! form it was originally written so the decomposition can be checked.

use std::fmt;
use std::ops::Index;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// A point of the state space. Always finite and at least one-dimensional.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(DVector<f64>);

impl StateVector {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        Self::try_from(DVector::from_vec(components))
    }

    pub fn from_slice(components: &[f64]) -> Result<Self> {
        Self::new(components.to_vec())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn into_vector(self) -> DVector<f64> {
        self.0
    }

    pub fn norm_inf(&self) -> f64 {
        norm_inf(self.as_slice())
    }
}

impl TryFrom<DVector<f64>> for StateVector {
    type Error = Error;

    fn try_from(v: DVector<f64>) -> Result<Self> {
        if v.is_empty() {
            return Err(Error::InvalidParameter("state vector must have n >= 1".into()));
        }
        if !all_finite(v.as_slice()) {
            return Err(Error::NonFinite("state vector"));
        }
        Ok(StateVector(v))
    }
}

impl Index<usize> for StateVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// A finite dense square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix(DMatrix<f64>);

impl SquareMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                got: m.ncols(),
            });
        }
        if m.nrows() == 0 {
            return Err(Error::InvalidParameter("empty matrix".into()));
        }
        if !all_finite(m.as_slice()) {
            return Err(Error::NonFinite("matrix"));
        }
        Ok(SquareMatrix(m))
    }

    /// Builds a matrix from rows given in row-major order.
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        for r in rows {
            if r.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: r.len(),
                });
            }
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn identity(n: usize) -> Self {
        SquareMatrix(DMatrix::identity(n, n))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    /// `(M + Mᵀ) / 2`
    pub fn symmetric_part(&self) -> DMatrix<f64> {
        (&self.0 + self.0.transpose()) * 0.5
    }
}

pub type PotentialFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
pub type GradientFn = dyn Fn(&[f64], &mut [f64]) + Send + Sync;
pub type StructureFn = dyn Fn(&[f64], &mut DMatrix<f64>) + Send + Sync;
pub type RhsFn = dyn Fn(&[f64], &mut [f64]) + Send + Sync;
pub type ExactFn = dyn Fn(f64, &[f64]) -> Option<Vec<f64>> + Send + Sync;

/// An ODE written as `dy/dt = L(y) ∇V(y)` together with its Lyapunov candidate.
///
/// Cheap to clone; all callbacks are shared.
#[derive(Clone)]
pub struct GradientSystem {
    name: String,
    dim: usize,
    potential: Arc<PotentialFn>,
    gradient: Arc<GradientFn>,
    structure: Arc<StructureFn>,
    native_rhs: Option<Arc<RhsFn>>,
    exact: Option<Arc<ExactFn>>,
    equilibria: Vec<StateVector>,
}

impl fmt::Debug for GradientSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GradientSystem")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("native_rhs", &self.native_rhs.is_some())
            .field("exact_solution", &self.exact.is_some())
            .field("equilibria", &self.equilibria)
            .finish()
    }
}

impl GradientSystem {
    pub fn builder(name: impl Into<String>, dim: usize) -> GradientSystemBuilder {
        GradientSystemBuilder {
            name: name.into(),
            dim,
            potential: None,
            gradient: None,
            structure: None,
            native_rhs: None,
            exact: None,
            equilibria: Vec::new(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Lyapunov function `V(y)`.
    pub fn potential(&self, y: &[f64]) -> f64 {
        (self.potential)(y)
    }

    pub fn gradient_into(&self, y: &[f64], out: &mut [f64]) {
        (self.gradient)(y, out)
    }

    pub fn gradient(&self, y: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim];
        self.gradient_into(y, &mut g);
        g
    }

    /// Writes `L(y)` into `out`, which must be `dim × dim`.
    pub fn structure_into(&self, y: &[f64], out: &mut DMatrix<f64>) {
        (self.structure)(y, out)
    }

    pub fn structure(&self, y: &[f64]) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        self.structure_into(y, &mut m);
        m
    }

    /// `L(y)·∇V(y)`, allocating. Hot loops should use [`FieldEvaluator`].
    pub fn vector_field(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.evaluator().eval(y, &mut out);
        out
    }

    pub fn has_native_rhs(&self) -> bool {
        self.native_rhs.is_some()
    }

    /// The right-hand side as originally written, if the system carries one.
    pub fn native_rhs(&self, y: &[f64]) -> Option<Vec<f64>> {
        self.native_rhs.as_ref().map(|rhs| {
            let mut out = vec![0.0; self.dim];
            rhs(y, &mut out);
            out
        })
    }

    /// Writes the native right-hand side into `out`; returns `false` (and
    /// leaves `out` untouched) when the system has none.
    pub(crate) fn native_rhs_into(&self, y: &[f64], out: &mut [f64]) -> bool {
        match &self.native_rhs {
            Some(rhs) => {
                rhs(y, out);
                true
            }
            None => false,
        }
    }

    pub fn has_exact_solution(&self) -> bool {
        self.exact.is_some()
    }

    /// Closed-form solution at time `t` from `y0`, if one is known and `y0`
    /// is in its domain.
    pub fn exact_solution(&self, t: f64, y0: &[f64]) -> Option<Vec<f64>> {
        self.exact.as_ref().and_then(|e| e(t, y0))
    }

    pub fn equilibria(&self) -> &[StateVector] {
        &self.equilibria
    }

    pub fn evaluator(&self) -> FieldEvaluator<'_> {
        FieldEvaluator {
            system: self,
            grad: vec![0.0; self.dim],
            mat: DMatrix::zeros(self.dim, self.dim),
        }
    }

    /// A copy of this system with `L` replaced, keeping `V`, the native
    /// right-hand side and the exact solution. Used to build deliberately
    /// inconsistent decompositions in tests and demos.
    pub fn with_structure<F>(&self, name: impl Into<String>, structure: F) -> GradientSystem
    where
        F: Fn(&[f64], &mut DMatrix<f64>) + Send + Sync + 'static,
    {
        GradientSystem {
            name: name.into(),
            structure: Arc::new(structure),
            ..self.clone()
        }
    }
}

pub struct GradientSystemBuilder {
    name: String,
    dim: usize,
    potential: Option<Arc<PotentialFn>>,
    gradient: Option<Arc<GradientFn>>,
    structure: Option<Arc<StructureFn>>,
    native_rhs: Option<Arc<RhsFn>>,
    exact: Option<Arc<ExactFn>>,
    equilibria: Vec<Vec<f64>>,
}

impl GradientSystemBuilder {
    pub fn potential<F>(mut self, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        self.potential = Some(Arc::new(f));
        self
    }

    pub fn gradient<F>(mut self, f: F) -> Self
    where
        F: Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    {
        self.gradient = Some(Arc::new(f));
        self
    }

    pub fn structure<F>(mut self, f: F) -> Self
    where
        F: Fn(&[f64], &mut DMatrix<f64>) + Send + Sync + 'static,
    {
        self.structure = Some(Arc::new(f));
        self
    }

    pub fn native_rhs<F>(mut self, f: F) -> Self
    where
        F: Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    {
        self.native_rhs = Some(Arc::new(f));
        self
    }

    pub fn exact_solution<F>(mut self, f: F) -> Self
    where
        F: Fn(f64, &[f64]) -> Option<Vec<f64>> + Send + Sync + 'static,
    {
        self.exact = Some(Arc::new(f));
        self
    }

    pub fn equilibrium(mut self, point: Vec<f64>) -> Self {
        self.equilibria.push(point);
        self
    }

    pub fn build(self) -> Result<GradientSystem> {
        if self.dim == 0 {
            return Err(Error::InvalidParameter("system dimension must be >= 1".into()));
        }
        let missing = |what: &str| Error::InvalidParameter(format!("{}: missing {what}", self.name));
        let potential = self.potential.clone().ok_or_else(|| missing("potential"))?;
        let gradient = self.gradient.clone().ok_or_else(|| missing("gradient"))?;
        let structure = self.structure.clone().ok_or_else(|| missing("structure matrix"))?;
        let mut equilibria = Vec::with_capacity(self.equilibria.len());
        for p in self.equilibria {
            if p.len() != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    got: p.len(),
                });
            }
            equilibria.push(StateVector::new(p)?);
        }
        Ok(GradientSystem {
            name: self.name,
            dim: self.dim,
            potential,
            gradient,
            structure,
            native_rhs: self.native_rhs,
            exact: self.exact,
            equilibria,
        })
    }
}

/// Evaluates `L(y)·∇V(y)` into caller buffers without allocating.
pub struct FieldEvaluator<'a> {
    system: &'a GradientSystem,
    grad: Vec<f64>,
    mat: DMatrix<f64>,
}

impl FieldEvaluator<'_> {
    pub fn eval(&mut self, y: &[f64], out: &mut [f64]) {
        self.system.gradient_into(y, &mut self.grad);
        self.system.structure_into(y, &mut self.mat);
        mat_vec(&self.mat, &self.grad, out);
    }
}

/// Evaluates the system's vector field at `y`.
pub fn eval_vector_field(system: &GradientSystem, y: &StateVector) -> Result<StateVector> {
    check_dim(system.dim(), y.dim())?;
    let f = system.vector_field(y.as_slice());
    if !all_finite(&f) {
        return Err(Error::NonFinite("vector field"));
    }
    StateVector::new(f)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Definiteness {
    NegativeDefinite,
    NegativeSemidefinite,
    Indefinite,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DefinitenessReport {
    pub classification: Definiteness,
    pub max_sym_eigenvalue: f64,
    pub tolerance_used: f64,
}

pub const DEFAULT_DEFINITENESS_TOL: f64 = 1e-10;

/// Classifies `M` by the spectrum of its symmetric part `(M + Mᵀ)/2`.
///
/// Negative definite iff the largest eigenvalue is `< -tol`, negative
/// semidefinite iff it is `<= tol`, indefinite otherwise.
pub fn check_definiteness(m: &SquareMatrix, tol: f64) -> Result<DefinitenessReport> {
    let sym = m.symmetric_part();
    let eig = sym
        .try_symmetric_eigen(f64::EPSILON, 10_000)
        .ok_or_else(|| Error::EigenSolver("symmetric eigen-decomposition did not converge".into()))?;
    let max = eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::EigenSolver("non-finite eigenvalue".into()));
    }
    let classification = if max < -tol {
        Definiteness::NegativeDefinite
    } else if max <= tol {
        Definiteness::NegativeSemidefinite
    } else {
        Definiteness::Indefinite
    };
    Ok(DefinitenessReport {
        classification,
        max_sym_eigenvalue: max,
        tolerance_used: tol,
    })
}

/// Per-sample outcome of [`verify_linear_gradient_form`].
#[derive(Debug, Clone, PartialEq)]
pub struct SampleCheck {
    pub point: Vec<f64>,
    /// `‖rhs(y) − L(y)∇V(y)‖∞`
    pub field_mismatch: f64,
    pub field_ok: bool,
    /// `∇V(y)·f(y)`
    pub dissipation: f64,
    pub dissipation_ok: bool,
}

impl SampleCheck {
    pub fn passed(&self) -> bool {
        self.field_ok && self.dissipation_ok
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearGradientReport {
    pub passed: bool,
    pub samples: Vec<SampleCheck>,
}

impl LinearGradientReport {
    pub fn failures(&self) -> impl Iterator<Item = &SampleCheck> {
        self.samples.iter().filter(|s| !s.passed())
    }
}

/// Checks at every sample that the decomposition reproduces the right-hand
/// side and that `V` does not increase along the flow.
///
/// Without a native right-hand side only the dissipation test is meaningful.
pub fn verify_linear_gradient_form(
    system: &GradientSystem,
    samples: &[StateVector],
    tol: f64,
) -> LinearGradientReport {
    let mut ev = system.evaluator();
    let mut f = vec![0.0; system.dim()];
    let mut g = vec![0.0; system.dim()];
    let mut checks = Vec::with_capacity(samples.len());
    for y in samples {
        if y.dim() != system.dim() {
            checks.push(SampleCheck {
                point: y.as_slice().to_vec(),
                field_mismatch: f64::INFINITY,
                field_ok: false,
                dissipation: f64::NAN,
                dissipation_ok: false,
            });
            continue;
        }
        let y = y.as_slice();
        ev.eval(y, &mut f);
        system.gradient_into(y, &mut g);
        let rhs = system.native_rhs(y).unwrap_or_else(|| f.clone());
        let mismatch = rhs
            .iter()
            .zip(&f)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let scale = 1.0 + norm_inf(&rhs);
        let dissipation = dot(&g, &f);
        checks.push(SampleCheck {
            point: y.to_vec(),
            field_mismatch: mismatch,
            field_ok: mismatch <= tol * scale,
            dissipation,
            dissipation_ok: dissipation <= tol,
        });
    }
    LinearGradientReport {
        passed: checks.iter().all(SampleCheck::passed),
        samples: checks,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientCheckReport {
    pub passed: bool,
    pub max_rel_error: f64,
    pub worst_point: Option<Vec<f64>>,
}

/// Compares the supplied gradient against central differences of `V` with
/// step `1e-6·(1+|y_i|)`. The error of component `i` is measured relative to
/// `max(1, |∂V/∂y_i|)`.
pub fn check_gradient_consistency(
    system: &GradientSystem,
    samples: &[StateVector],
    rel_tol: f64,
) -> GradientCheckReport {
    let n = system.dim();
    let mut g = vec![0.0; n];
    let mut worst = 0.0f64;
    let mut worst_point = None;
    for y in samples {
        let y = y.as_slice();
        system.gradient_into(y, &mut g);
        let mut p = y.to_vec();
        for i in 0..n {
            let step = 1e-6 * (1.0 + y[i].abs());
            p[i] = y[i] + step;
            let vp = system.potential(&p);
            p[i] = y[i] - step;
            let vm = system.potential(&p);
            p[i] = y[i];
            let fd = (vp - vm) / (2.0 * step);
            let err = (fd - g[i]).abs() / g[i].abs().max(1.0);
            if !(err <= worst) {
                worst = if err.is_nan() { f64::INFINITY } else { err };
                worst_point = Some(y.to_vec());
            }
        }
    }
    GradientCheckReport {
        passed: worst <= rel_tol,
        max_rel_error: worst,
        worst_point,
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        Err(Error::DimensionMismatch { expected, got })
    } else {
        Ok(())
    }
}

pub(crate) fn all_finite(xs: &[f64]) -> bool {
    xs.iter().all(|x| x.is_finite())
}

pub(crate) fn norm_inf(xs: &[f64]) -> f64 {
    xs.iter().fold(0.0, |m, x| {
        if x.is_nan() {
            f64::NAN
        } else {
            m.max(x.abs())
        }
    })
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn mat_vec(m: &DMatrix<f64>, v: &[f64], out: &mut [f64]) {
    let n = v.len();
    for (i, o) in out.iter_mut().enumerate() {
        let mut s = 0.0;
        for j in 0..n {
            s += m[(i, j)] * v[j];
        }
        *o = s;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadratic_bowl() -> GradientSystem {
        GradientSystem::builder("bowl", 2)
            .potential(|y| 0.5 * (y[0] * y[0] + y[1] * y[1]))
            .gradient(|y, g| {
                g[0] = y[0];
                g[1] = y[1];
            })
            .structure(|_, l| l.fill_with_identity())
            .build()
            .unwrap()
    }

    #[test]
    fn state_vector_rejects_empty_and_nan() {
        assert!(StateVector::new(vec![]).is_err());
        assert_eq!(
            StateVector::new(vec![1.0, f64::NAN]),
            Err(Error::NonFinite("state vector"))
        );
        assert!(StateVector::new(vec![f64::INFINITY]).is_err());
        assert_eq!(StateVector::new(vec![3.0, -4.0]).unwrap().norm_inf(), 4.0);
    }

    #[test]
    fn builder_requires_callbacks() {
        let err = GradientSystem::builder("x", 1).build().unwrap_err();
        assert!(matches!(err, Error::InvalidParameter(_)));
        let err = GradientSystem::builder("x", 0).build().unwrap_err();
        assert!(matches!(err, Error::InvalidParameter(_)));
    }

    #[test]
    fn vector_field_dimension_mismatch() {
        let s = quadratic_bowl();
        let y = StateVector::new(vec![1.0]).unwrap();
        assert_eq!(
            eval_vector_field(&s, &y),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        );
    }

    #[test]
    fn vector_field_non_finite_flagged() {
        let s = GradientSystem::builder("blows", 1)
            .potential(|y| y[0].exp())
            .gradient(|y, g| g[0] = y[0].exp())
            .structure(|_, l| l[(0, 0)] = -1.0)
            .build()
            .unwrap();
        let y = StateVector::new(vec![1000.0]).unwrap();
        assert_eq!(eval_vector_field(&s, &y), Err(Error::NonFinite("vector field")));
    }

    #[test]
    fn definiteness_examples() {
        let neg = SquareMatrix::new(-DMatrix::identity(2, 2)).unwrap();
        let r = check_definiteness(&neg, 1e-10).unwrap();
        assert_eq!(r.classification, Definiteness::NegativeDefinite);
        assert_eq!(r.max_sym_eigenvalue, -1.0);

        // symmetric part is diag(0, -1000)
        let duff = SquareMatrix::from_rows(&[&[0.0, 1.0], &[-1.0, -1000.0]]).unwrap();
        let r = check_definiteness(&duff, 1e-10).unwrap();
        assert_eq!(r.classification, Definiteness::NegativeSemidefinite);
        assert_eq!(r.max_sym_eigenvalue, 0.0);

        let pos = SquareMatrix::identity(2);
        let r = check_definiteness(&pos, 1e-10).unwrap();
        assert_eq!(r.classification, Definiteness::Indefinite);
        assert_eq!(r.tolerance_used, 1e-10);
    }

    #[test]
    fn definiteness_ignores_negative_eigenvalues_of_nonsymmetric_part() {
        // eigenvalues of M are -1 (double), but the symmetric part is indefinite
        let m = SquareMatrix::from_rows(&[&[-1.0, 10.0], &[0.0, -1.0]]).unwrap();
        let r = check_definiteness(&m, 1e-10).unwrap();
        assert_eq!(r.classification, Definiteness::Indefinite);
        assert!((r.max_sym_eigenvalue - 4.0).abs() < 1e-12);
    }

    #[test]
    fn square_matrix_rejects_bad_input() {
        assert!(SquareMatrix::new(DMatrix::zeros(2, 3)).is_err());
        assert!(SquareMatrix::from_rows(&[&[1.0, f64::NAN], &[0.0, 1.0]]).is_err());
        assert!(SquareMatrix::from_rows(&[&[1.0, 2.0], &[0.0]]).is_err());
    }

    #[test]
    fn verify_flags_positive_structure() {
        // L = +I makes V increase
        let s = quadratic_bowl();
        let samples = vec![StateVector::new(vec![1.0, 0.5]).unwrap()];
        let rep = verify_linear_gradient_form(&s, &samples, 1e-10);
        assert!(!rep.passed);
        assert!(rep.samples[0].field_ok);
        assert!(!rep.samples[0].dissipation_ok);

        let fixed = s.with_structure("bowl-neg", |_, l| {
            l.fill_with_identity();
            l.neg_mut();
        });
        let rep = verify_linear_gradient_form(&fixed, &samples, 1e-10);
        assert!(rep.passed);
        assert_eq!(rep.failures().count(), 0);
    }

    #[test]
    fn gradient_consistency_detects_wrong_gradient() {
        let good = quadratic_bowl();
        let samples = vec![StateVector::new(vec![0.3, -1.2]).unwrap()];
        assert!(check_gradient_consistency(&good, &samples, 1e-6).passed);

        let bad = GradientSystem::builder("bad", 2)
            .potential(|y| 0.5 * (y[0] * y[0] + y[1] * y[1]))
            .gradient(|y, g| {
                g[0] = 2.0 * y[0];
                g[1] = y[1];
            })
            .structure(|_, l| l.fill_with_identity())
            .build()
            .unwrap();
        let rep = check_gradient_consistency(&bad, &samples, 1e-6);
        assert!(!rep.passed);
        assert_eq!(rep.worst_point, Some(vec![0.3, -1.2]));
    }
}
