// SPDX-License-Identifier: Apache-2.0
//! The deterministic limit of the normalized counts:
//!
//! `dy_ik/dt = (Σ_{j∼i} γ̄^k_{ji} y_jk)(1 − Σ_m y_im) − μ^k_i y_ik`
//!
//! with `γ̄^k_{ji} = α_{ji} γ^k_{ji}` and `α_{ji} = lim N_j / N_i`.

mod fixed_point;
mod integrate;
mod system;

pub use fixed_point::{fixed_point, FixedPoint, NewtonOptions, Stability};
pub use integrate::{integrate, DenseOutput, IntegratorConfig, DEFAULT_STEP, PROJECTION_TOLERANCE};
pub use system::{vector_field, FractionState, MeanFieldSystem};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MeanFieldError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("state leaves the feasible set by {excess:e} at t = {time}; reduce the step")]
    StepTooLarge { time: f64, excess: f64 },
    #[error("non-finite state at t = {time}")]
    NonFiniteState { time: f64 },
    #[error("invalid fraction state: {0}")]
    InvalidState(String),
    #[error("invalid integrator setting: {0}")]
    InvalidConfig(String),
    #[error("alpha must be an {expected}x{expected} matrix of finite non-negative ratios")]
    InvalidAlpha { expected: usize },
    #[error("Newton iteration did not converge in {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("Newton iterate left the feasible set")]
    LeftFeasibleSet,
}
