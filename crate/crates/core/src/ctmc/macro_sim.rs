// SPDX-License-Identifier: Apache-2.0
//! Direct-method Gillespie simulation of the island-level chain.

use super::{CtmcError, Event, MacroState, RateModel, Trajectory};
use crate::rng::SimRng;
use crate::topology::Network;

pub const DEFAULT_EVENT_CAP: u64 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub horizon: f64,
    pub event_cap: u64,
}

impl SimConfig {
    pub fn new(horizon: f64) -> Self {
        SimConfig { horizon, event_cap: DEFAULT_EVENT_CAP }
    }

    pub fn with_event_cap(mut self, cap: u64) -> Self {
        self.event_cap = cap;
        self
    }

    pub(crate) fn check(&self) -> Result<(), CtmcError> {
        if self.horizon > 0.0 && self.horizon.is_finite() {
            Ok(())
        } else {
            Err(CtmcError::InvalidHorizon(self.horizon))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub events: u64,
    pub final_state: MacroState,
    pub absorbed_at: Option<f64>,
}

/// Runs one replica, calling `observer(time, event, state_after)` on every jump.
///
/// Stops at the horizon or on absorption. Returns `Err(cap)` through
/// [`CtmcError::EventCapExceeded`] with an empty partial trajectory; use
/// [`simulate_macro`] to keep the path.
pub fn run_macro<F>(
    model: &RateModel,
    initial: &MacroState,
    config: &SimConfig,
    rng: &mut SimRng,
    mut observer: F,
) -> Result<RunSummary, CtmcError>
where
    F: FnMut(f64, Event, &MacroState),
{
    config.check()?;
    if initial.islands() != model.islands() || initial.strains() != model.strains() {
        return Err(CtmcError::InvalidState("initial state shape does not match network".into()));
    }
    initial.validate(model.sizes())?;

    let mut state = initial.clone();
    let mut rates = vec![0.0; model.num_slots()];
    let mut t = 0.0;
    let mut events = 0u64;
    loop {
        let total = model.rates_into(state.as_slice(), &mut rates);
        if total <= 0.0 {
            return Ok(RunSummary { events, final_state: state, absorbed_at: Some(t) });
        }
        let dt = rng.exponential(total);
        if t + dt > config.horizon {
            return Ok(RunSummary { events, final_state: state, absorbed_at: None });
        }
        if events == config.event_cap {
            return Err(CtmcError::EventCapExceeded {
                cap: config.event_cap,
                partial: Box::new(Trajectory::new(initial.clone(), config.horizon)),
            });
        }
        t += dt;
        let slot = select_slot(&rates, rng.uniform() * total);
        let event = model.slot_event(slot);
        state.apply(event);
        debug_assert!(state.validate(model.sizes()).is_ok());
        events += 1;
        observer(t, event, &state);
    }
}

/// First slot whose cumulative rate reaches `target`; a target sitting exactly
/// on a boundary goes to the earlier slot. Falls back to the last
/// positive slot when rounding leaves `target` past the final partial sum.
#[inline]
fn select_slot(rates: &[f64], target: f64) -> usize {
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (slot, &r) in rates.iter().enumerate() {
        if r > 0.0 {
            acc += r;
            last_positive = slot;
            if target <= acc {
                return slot;
            }
        }
    }
    last_positive
}

/// Simulates one replica and records its full trajectory.
pub fn simulate_macro(
    network: &Network,
    sizes: &[u32],
    initial: &MacroState,
    config: &SimConfig,
    seed: u64,
    replica_index: u64,
) -> Result<Trajectory, CtmcError> {
    let model = RateModel::new(network, sizes)?;
    let mut rng = SimRng::for_replica(seed, replica_index);
    let mut traj = Trajectory::new(initial.clone(), config.horizon);
    let result = run_macro(&model, initial, config, &mut rng, |t, e, s| traj.push(t, e, s));
    match result {
        Ok(summary) => {
            traj.absorbed_at = summary.absorbed_at;
            Ok(traj)
        }
        Err(CtmcError::EventCapExceeded { cap, .. }) => {
            Err(CtmcError::EventCapExceeded { cap, partial: Box::new(traj) })
        }
        Err(e) => Err(e),
    }
}
