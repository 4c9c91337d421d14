// SPDX-License-Identifier: Apache-2.0
//! The macroscopic jump process `Y(t)` of per-island, per-strain infected
//! counts: exact Gillespie simulation, a node-level event-driven simulator
//! used as an oracle, and the finite generator with its transient solver.

mod generator;
mod macro_sim;
mod micro_sim;
mod rates;
mod state;
mod uniformization;

pub use generator::{
    build_generator, count_states, GeneratorMatrix, DEFAULT_STATE_CAP,
};
pub use macro_sim::{run_macro, simulate_macro, RunSummary, SimConfig, DEFAULT_EVENT_CAP};
pub use micro_sim::{simulate_micro, MicroState, NodeLabel};
pub use rates::{transition_rates, RateModel};
pub use state::{Event, MacroState, Trajectory};
pub(crate) use state::fractions_into;
pub use uniformization::{total_variation, transient_distribution, DEFAULT_TAIL_TOLERANCE};

#[derive(Debug, thiserror::Error)]
pub enum CtmcError {
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("event cap of {cap} exceeded before the horizon")]
    EventCapExceeded {
        cap: u64,
        partial: Box<Trajectory>,
    },
    #[error("horizon must be positive and finite, got {0}")]
    InvalidHorizon(f64),
    #[error("state space has {count} states, above the cap of {cap}")]
    StateSpaceTooLarge { count: u128, cap: usize },
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("transient solution is not a probability vector: {0}")]
    NonStochasticResult(String),
    #[error(transparent)]
    Sizes(#[from] crate::topology::ScheduleError),
}
