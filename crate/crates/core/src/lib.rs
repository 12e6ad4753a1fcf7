//! Lyapunov-preserving time stepping with discrete gradient methods.
//!
//! Systems are written in linear-gradient form `y' = L(y)·∇V(y)`. When the
//! symmetric part of `L` is negative semidefinite, `V` is a Lyapunov
//! function, and the discrete gradient step keeps `V` non-increasing for
//! every step size. Fixed-step Euler, RK4 and Rosenbrock baselines, bundled
//! benchmark problems and experiment drivers are included for comparison.

pub mod analysis;
pub mod baselines;
pub mod cli;
pub mod dgrad;
pub mod error;
pub mod plot;
pub mod problems;
pub mod system;

pub use analysis::{
    fit_order, global_error, integrate, log_spaced, max_lyapunov_increment, run_sweep, DgOptions,
    Integrator, MethodId, OrderFit, SweepOptions, SweepReport, SweepRow, Trajectory, TrajectoryStatus, Truth,
    BLOWUP_THRESHOLD,
};
pub use baselines::{BaselineMethod, ROS2_D};
pub use dgrad::{
    DgScheme, DgStep, DiscreteGradientKind, LtildeRule, NewtonConfig, Predictor, StepDiagnostics, StepStatus,
};
pub use error::{Error, Result};
pub use problems::{exact_solution, make_problem, reference_trajectory, sample_points, ProblemId, ProblemSpec, ReferenceTrajectory};
pub use system::{
    check_definiteness, check_gradient_consistency, eval_vector_field, verify_linear_gradient_form, Definiteness,
    GradientSystem, SquareMatrix, StateVector,
};
