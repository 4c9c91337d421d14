// SPDX-License-Identifier: Apache-2.0
//! Martingale residuals of simulated paths, their variance against the
//! L2 bound, and sup-norm distances between simulation and the ODE.

mod distance;
mod martingale;
pub mod stats;
mod sweep;
mod variance;

pub use distance::sup_distance;
pub use martingale::{extract_martingale, MartingalePath};
pub use sweep::{
    convergence_sweep, realize_initial, sweep_replica_index, ConvergenceConfig, ConvergenceReport, EntryReport, Rounding,
    VarCheck,
};
pub use variance::{
    martingale_variance_bound, martingale_variance_check, mean_zero_check, variance_exponents, BoundForm,
    MeanCheck, VarianceCheck, VarianceEntry, MIN_ENSEMBLE,
};

use crate::{ctmc::CtmcError, meanfield::MeanFieldError, topology::ScheduleError};

#[derive(Debug, thiserror::Error)]
pub enum AnalysisError {
    #[error("sample grid reaches {time}, beyond the trajectory horizon {horizon}")]
    GridBeyondHorizon { time: f64, horizon: f64 },
    #[error("sample grid must be non-decreasing and non-negative")]
    UnsortedGrid,
    #[error("paths are sampled on different grids or shapes")]
    GridMismatch,
    #[error("time {0} is not a sample time of the paths")]
    TimeNotOnGrid(f64),
    #[error("ensemble of {found} paths; at least {required} needed")]
    EnsembleTooSmall { found: usize, required: usize },
    #[error("trajectory shape does not match the network")]
    ShapeMismatch,
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error(transparent)]
    Ctmc(#[from] CtmcError),
    #[error(transparent)]
    MeanField(#[from] MeanFieldError),
}
