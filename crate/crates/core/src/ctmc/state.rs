// SPDX-License-Identifier: Apache-2.0
use std::fmt;

use super::CtmcError;
use crate::path::SampledPath;

/// Infected counts `Y[i][k]`, stored island-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MacroState {
    islands: usize,
    strains: usize,
    counts: Vec<u32>,
}

impl MacroState {
    pub fn zeros(islands: usize, strains: usize) -> Self {
        MacroState { islands, strains, counts: vec![0; islands * strains] }
    }

    pub fn from_flat(islands: usize, strains: usize, counts: Vec<u32>) -> Self {
        assert_eq!(counts.len(), islands * strains, "flat counts must be islands * strains long");
        MacroState { islands, strains, counts }
    }

    /// From rows `counts[island][strain]`.
    pub fn from_rows(rows: &[Vec<u32>]) -> Result<Self, CtmcError> {
        let strains = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != strains) {
            return Err(CtmcError::InvalidState("ragged count matrix".into()));
        }
        Ok(MacroState {
            islands: rows.len(),
            strains,
            counts: rows.iter().flatten().copied().collect(),
        })
    }

    #[inline]
    pub fn islands(&self) -> usize {
        self.islands
    }

    #[inline]
    pub fn strains(&self) -> usize {
        self.strains
    }

    #[inline]
    pub fn get(&self, island: usize, strain: usize) -> u32 {
        self.counts[island * self.strains + strain]
    }

    #[inline]
    pub fn set(&mut self, island: usize, strain: usize, value: u32) {
        self.counts[island * self.strains + strain] = value;
    }

    #[inline]
    pub fn as_slice(&self) -> &[u32] {
        &self.counts
    }

    pub fn island_total(&self, island: usize) -> u32 {
        self.counts[island * self.strains..(island + 1) * self.strains].iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.counts.iter().all(|&c| c == 0)
    }

    /// `Σ_k Y[i][k] ≤ N_i` on every island.
    pub fn validate(&self, sizes: &[u32]) -> Result<(), CtmcError> {
        if sizes.len() != self.islands {
            return Err(CtmcError::InvalidState(format!(
                "state has {} islands, sizes vector has {}",
                self.islands,
                sizes.len()
            )));
        }
        for (i, &n) in sizes.iter().enumerate() {
            let total = u64::from(self.island_total(i));
            if total > u64::from(n) {
                return Err(CtmcError::InvalidState(format!(
                    "island {i} has {total} infected but only {n} nodes"
                )));
            }
        }
        Ok(())
    }

    pub fn apply(&mut self, event: Event) {
        match event {
            Event::Infection { island, strain } => {
                self.counts[island * self.strains + strain] += 1;
            }
            Event::Healing { island, strain } => {
                let c = &mut self.counts[island * self.strains + strain];
                debug_assert!(*c > 0, "healing from an empty class");
                *c -= 1;
            }
        }
    }

    /// Per-island fractions `Y[i][k] / N_i`, island-major.
    pub fn fractions(&self, sizes: &[u32]) -> Vec<f64> {
        let mut out = vec![0.0; self.counts.len()];
        self.fractions_into(sizes, &mut out);
        out
    }

    pub fn fractions_into(&self, sizes: &[u32], out: &mut [f64]) {
        fractions_into(self.strains, &self.counts, sizes, out);
    }
}

pub(crate) fn fractions_into(strains: usize, counts: &[u32], sizes: &[u32], out: &mut [f64]) {
    for (idx, (&c, o)) in counts.iter().zip(out.iter_mut()).enumerate() {
        *o = f64::from(c) / f64::from(sizes[idx / strains]);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Event {
    Infection { island: usize, strain: usize },
    Healing { island: usize, strain: usize },
}

impl Event {
    pub fn island(&self) -> usize {
        match *self {
            Event::Infection { island, .. } | Event::Healing { island, .. } => island,
        }
    }

    pub fn strain(&self) -> usize {
        match *self {
            Event::Infection { strain, .. } | Event::Healing { strain, .. } => strain,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Event::Infection { .. } => "infection",
            Event::Healing { .. } => "healing",
        }
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({}, {})", self.name(), self.island(), self.strain())
    }
}

/// Càdlàg record of one run: the initial state and every effective jump with
/// the state right after it.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub initial: MacroState,
    pub times: Vec<f64>,
    pub events: Vec<Event>,
    /// Flat `len() × islands × strains` post-jump counts.
    states: Vec<u32>,
    pub horizon: f64,
    /// Time at which the disease-free state was reached, if it was.
    pub absorbed_at: Option<f64>,
}

impl Trajectory {
    pub fn new(initial: MacroState, horizon: f64) -> Self {
        let absorbed_at = initial.is_zero().then_some(0.0);
        Trajectory {
            initial,
            times: Vec::new(),
            events: Vec::new(),
            states: Vec::new(),
            horizon,
            absorbed_at,
        }
    }

    pub(crate) fn push(&mut self, time: f64, event: Event, state: &MacroState) {
        self.times.push(time);
        self.events.push(event);
        self.states.extend_from_slice(state.as_slice());
    }

    pub fn islands(&self) -> usize {
        self.initial.islands()
    }

    pub fn strains(&self) -> usize {
        self.initial.strains()
    }

    /// Number of recorded jumps.
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    fn width(&self) -> usize {
        self.initial.as_slice().len()
    }

    /// Counts right after jump `n`.
    pub fn state_after(&self, n: usize) -> &[u32] {
        let w = self.width();
        &self.states[n * w..(n + 1) * w]
    }

    /// Counts at time `t` (right-continuous).
    pub fn state_at(&self, t: f64) -> &[u32] {
        let jumps = self.times.partition_point(|&s| s <= t);
        if jumps == 0 {
            self.initial.as_slice()
        } else {
            self.state_after(jumps - 1)
        }
    }

    pub fn final_state(&self) -> MacroState {
        MacroState::from_flat(self.islands(), self.strains(), self.state_at(f64::INFINITY).to_vec())
    }

    /// Fractions `Y/N` on a non-decreasing time grid.
    pub fn sample_fractions(&self, grid: &[f64], sizes: &[u32]) -> SampledPath {
        let w = self.width();
        let mut values = vec![0.0; grid.len() * w];
        let mut jumps = 0;
        for (g, out) in grid.iter().zip(values.chunks_mut(w)) {
            while jumps < self.times.len() && self.times[jumps] <= *g {
                jumps += 1;
            }
            let counts = if jumps == 0 { self.initial.as_slice() } else { self.state_after(jumps - 1) };
            fractions_into(self.strains(), counts, sizes, out);
        }
        SampledPath::new(grid.to_vec(), w, values)
    }

    /// Checks ordering, the horizon, state validity and unit-jump structure.
    pub fn check_invariants(&self, sizes: &[u32]) -> Result<(), String> {
        self.initial.validate(sizes).map_err(|e| e.to_string())?;
        let mut prev_time = 0.0;
        let mut prev = self.initial.clone();
        for n in 0..self.len() {
            let t = self.times[n];
            if !(t > prev_time || (n == 0 && t >= 0.0)) || t > self.horizon {
                return Err(format!("jump {n} at time {t} out of order or past horizon"));
            }
            let mut expected = prev.clone();
            if let Event::Healing { island, strain } = self.events[n] {
                if expected.get(island, strain) == 0 {
                    return Err(format!("jump {n} heals an empty class"));
                }
            }
            expected.apply(self.events[n]);
            if expected.as_slice() != self.state_after(n) {
                return Err(format!("jump {n} is not the unit jump {}", self.events[n]));
            }
            expected.validate(sizes).map_err(|e| format!("jump {n}: {e}"))?;
            prev = expected;
            prev_time = t;
        }
        Ok(())
    }
}
