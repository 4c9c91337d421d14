// SPDX-License-Identifier: Apache-2.0
//! Multi-strain SIS epidemics on multipartite networks.
//!
//! - [`topology`]: island-level network descriptions and size schedules.
//! - [`ctmc`]: the exact jump process of infected counts, a node-level
//!   simulator, and the finite generator with a uniformization solver.
//! - [`meanfield`]: the limiting ODE, fixed-step RK4 and Newton equilibria.
//! - [`analysis`]: martingale residuals, variance checks and convergence sweeps.

// `!(x > 0.0)` is deliberate throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analysis;
pub mod ctmc;
pub mod io;
pub mod meanfield;
pub mod path;
pub mod rng;
pub mod topology;

pub use analysis::{AnalysisError, ConvergenceReport, MartingalePath};
pub use ctmc::{CtmcError, Event, GeneratorMatrix, MacroState, MicroState, SimConfig, Trajectory};
pub use meanfield::{FractionState, MeanFieldError, MeanFieldSystem};
pub use path::SampledPath;
pub use topology::{validate_spec, Network, NetworkSpec, SizeSchedule, TopologyError};
