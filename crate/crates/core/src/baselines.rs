//! Fixed-step reference integrators: explicit Euler, classical RK4 and a
//! two-stage linearly implicit Rosenbrock scheme (`ros2`).
//!
//! Baselines integrate the system's native right-hand side when it has one,
//! otherwise `L(y)·∇V(y)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::system::{all_finite, check_dim, FieldEvaluator, GradientSystem, StateVector};

/// Damping parameter `1/(2+√2)` that makes `ros2` L-stable.
pub const ROS2_D: f64 = 0.292_893_218_813_452_5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BaselineMethod {
    Euler,
    Rk4,
    /// `W = I − h·d·J`; `k₁ = W⁻¹f(y)`; `k₂ = W⁻¹(f(y + ½h·k₁) − k₁) + k₁`;
    /// `z = y + h·k₂`, with `J` a forward-difference Jacobian at `y`.
    Ros2 { d: f64 },
}

impl BaselineMethod {
    pub fn ros2() -> Self {
        BaselineMethod::Ros2 { d: ROS2_D }
    }

    pub fn ros2_with_damping(d: f64) -> Result<Self> {
        if d > 0.0 && d.is_finite() {
            Ok(BaselineMethod::Ros2 { d })
        } else {
            Err(Error::InvalidParameter(format!("ros2 damping must be > 0, got {d}")))
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            BaselineMethod::Euler => "euler",
            BaselineMethod::Rk4 => "rk4",
            BaselineMethod::Ros2 { .. } => "ros2",
        }
    }

    /// One step of size `h` from `y`.
    pub fn step(&self, system: &GradientSystem, y: &StateVector, h: f64) -> Result<StateVector> {
        check_dim(system.dim(), y.dim())?;
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidParameter(format!("step size must be > 0, got {h}")));
        }
        let n = system.dim();
        let mut rhs = Rhs::new(system);
        let mut ws = BaselineWorkspace::new(n);
        let mut out = vec![0.0; n];
        self.step_with(&mut rhs, y.as_slice(), h, &mut out, &mut ws)?;
        StateVector::new(out)
    }

    pub(crate) fn step_with(
        &self,
        f: &mut Rhs<'_>,
        y: &[f64],
        h: f64,
        out: &mut [f64],
        ws: &mut BaselineWorkspace,
    ) -> Result<()> {
        let n = y.len();
        match *self {
            BaselineMethod::Euler => {
                f.eval(y, &mut ws.k1);
                for i in 0..n {
                    out[i] = y[i] + h * ws.k1[i];
                }
            }
            BaselineMethod::Rk4 => {
                f.eval(y, &mut ws.k1);
                for i in 0..n {
                    ws.tmp[i] = y[i] + 0.5 * h * ws.k1[i];
                }
                f.eval(&ws.tmp, &mut ws.k2);
                for i in 0..n {
                    ws.tmp[i] = y[i] + 0.5 * h * ws.k2[i];
                }
                f.eval(&ws.tmp, &mut ws.k3);
                for i in 0..n {
                    ws.tmp[i] = y[i] + h * ws.k3[i];
                }
                f.eval(&ws.tmp, &mut ws.k4);
                for i in 0..n {
                    out[i] = y[i] + h / 6.0 * (ws.k1[i] + 2.0 * ws.k2[i] + 2.0 * ws.k3[i] + ws.k4[i]);
                }
            }
            BaselineMethod::Ros2 { d } => {
                f.eval(y, &mut ws.k1);
                if !all_finite(&ws.k1) {
                    return Err(Error::NonFinite("ros2 stage"));
                }
                // W = I − h·d·J, J by forward differences
                ws.tmp.copy_from_slice(y);
                for j in 0..n {
                    let step = f64::EPSILON.sqrt() * (1.0 + y[j].abs());
                    ws.tmp[j] = y[j] + step;
                    let dy = ws.tmp[j] - y[j];
                    f.eval(&ws.tmp, &mut ws.k2);
                    ws.tmp[j] = y[j];
                    for i in 0..n {
                        let jij = (ws.k2[i] - ws.k1[i]) / dy;
                        ws.w[(i, j)] = if i == j { 1.0 } else { 0.0 } - h * d * jij;
                    }
                }
                if !all_finite(ws.w.as_slice()) {
                    return Err(Error::NonFinite("ros2 Jacobian"));
                }
                let lu = ws.w.clone().lu();
                let k1 = lu
                    .solve(&DVector::from_column_slice(&ws.k1))
                    .ok_or(Error::SingularMatrix("ros2 W"))?;
                for i in 0..n {
                    ws.tmp[i] = y[i] + 0.5 * h * k1[i];
                }
                f.eval(&ws.tmp, &mut ws.k2);
                for i in 0..n {
                    ws.k2[i] -= k1[i];
                }
                let k2 = lu
                    .solve(&DVector::from_column_slice(&ws.k2))
                    .ok_or(Error::SingularMatrix("ros2 W"))?;
                for i in 0..n {
                    out[i] = y[i] + h * (k2[i] + k1[i]);
                }
            }
        }
        if all_finite(out) {
            Ok(())
        } else {
            Err(Error::NonFinite("baseline step"))
        }
    }
}

/// Right-hand side used by the baselines.
pub(crate) struct Rhs<'a> {
    system: &'a GradientSystem,
    ev: FieldEvaluator<'a>,
}

impl<'a> Rhs<'a> {
    pub(crate) fn new(system: &'a GradientSystem) -> Self {
        Rhs {
            system,
            ev: system.evaluator(),
        }
    }

    pub(crate) fn eval(&mut self, y: &[f64], out: &mut [f64]) {
        if !self.system.native_rhs_into(y, out) {
            self.ev.eval(y, out);
        }
    }
}

pub(crate) struct BaselineWorkspace {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
    w: DMatrix<f64>,
}

impl BaselineWorkspace {
    pub(crate) fn new(n: usize) -> Self {
        BaselineWorkspace {
            k1: vec![0.0; n],
            k2: vec![0.0; n],
            k3: vec![0.0; n],
            k4: vec![0.0; n],
            tmp: vec![0.0; n],
            w: DMatrix::zeros(n, n),
        }
    }
}
