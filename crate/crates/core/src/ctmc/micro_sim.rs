// SPDX-License-Identifier: Apache-2.0
//! Node-level event-driven simulation.
//!
//! Every infected node carries its own clocks: one healing clock and one
//! infection-attempt clock per neighboring island. Clocks live in a single
//! time-ordered queue; a clock armed during an infection that has since
//! ended is discarded when it surfaces. An attempt picks a uniform target in
//! the neighboring island and succeeds only if the target is healthy. The
//! attempt clock re-arms after firing for as long as the node stays infected.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{CtmcError, Event, MacroState, SimConfig, Trajectory};
use crate::rng::SimRng;
use crate::topology::Network;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeLabel {
    Healthy,
    Infected(u16),
}

/// Per-node labels, `labels[island][node]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MicroState {
    pub labels: Vec<Vec<NodeLabel>>,
}

impl MicroState {
    /// Places `Y[i][k]` strain-`k` nodes at the front of island `i`, strain by
    /// strain; the rest are healthy. Node placement does not affect the law of
    /// the aggregated process.
    pub fn from_macro(state: &MacroState, sizes: &[u32]) -> Result<Self, CtmcError> {
        state.validate(sizes)?;
        let labels = sizes
            .iter()
            .enumerate()
            .map(|(i, &n)| {
                let mut row = Vec::with_capacity(n as usize);
                for k in 0..state.strains() {
                    row.extend(std::iter::repeat_n(NodeLabel::Infected(k as u16), state.get(i, k) as usize));
                }
                row.resize(n as usize, NodeLabel::Healthy);
                row
            })
            .collect();
        Ok(MicroState { labels })
    }

    pub fn aggregate(&self, strains: usize) -> MacroState {
        let mut state = MacroState::zeros(self.labels.len(), strains);
        for (i, row) in self.labels.iter().enumerate() {
            for label in row {
                if let NodeLabel::Infected(k) = *label {
                    let k = k as usize;
                    state.set(i, k, state.get(i, k) + 1);
                }
            }
        }
        state
    }

    pub fn sizes(&self) -> Vec<u32> {
        self.labels.iter().map(|r| r.len() as u32).collect()
    }
}

#[derive(Debug, Clone, Copy)]
enum ClockKind {
    Heal,
    Attempt { target_island: usize, rate: f64 },
}

#[derive(Debug, Clone, Copy)]
struct Clock {
    time: f64,
    seq: u64,
    island: usize,
    node: usize,
    epoch: u32,
    kind: ClockKind,
}

impl PartialEq for Clock {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Clock {}

impl PartialOrd for Clock {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Clock {
    // reversed: BinaryHeap is a max-heap and the earliest clock must surface first
    fn cmp(&self, other: &Self) -> Ordering {
        other.time.total_cmp(&self.time).then_with(|| other.seq.cmp(&self.seq))
    }
}

struct Clocks<'a> {
    network: &'a Network,
    heap: BinaryHeap<Clock>,
    epochs: Vec<Vec<u32>>,
    seq: u64,
}

impl Clocks<'_> {
    fn push(&mut self, time: f64, island: usize, node: usize, kind: ClockKind) {
        let epoch = self.epochs[island][node];
        self.heap.push(Clock { time, seq: self.seq, island, node, epoch, kind });
        self.seq += 1;
    }

    fn arm_infected(&mut self, now: f64, island: usize, node: usize, strain: usize, rng: &mut SimRng) {
        self.epochs[island][node] += 1;
        let mu = self.network.mu(strain, island);
        self.push(now + rng.exponential(mu), island, node, ClockKind::Heal);
        for &j in self.network.neighbors(island) {
            let rate = self.network.gamma(strain, island, j);
            if rate > 0.0 {
                self.push(now + rng.exponential(rate), island, node, ClockKind::Attempt { target_island: j, rate });
            }
        }
    }
}

/// Simulates one replica at node granularity and returns the aggregated
/// trajectory of effective jumps. Attempts on already infected targets are
/// processed but not recorded.
pub fn simulate_micro(
    network: &Network,
    initial: &MicroState,
    config: &SimConfig,
    seed: u64,
    replica_index: u64,
) -> Result<Trajectory, CtmcError> {
    config.check()?;
    let sizes = initial.sizes();
    network.check_sizes(&sizes)?;
    let strains = network.num_strains();
    for row in &initial.labels {
        if row.iter().any(|l| matches!(*l, NodeLabel::Infected(k) if k as usize >= strains)) {
            return Err(CtmcError::InvalidState("node label names an unknown strain".into()));
        }
    }

    let mut rng = SimRng::for_replica(seed, replica_index);
    let mut labels = initial.labels.clone();
    let mut state = initial.aggregate(strains);
    let mut traj = Trajectory::new(state.clone(), config.horizon);
    let mut clocks = Clocks {
        network,
        heap: BinaryHeap::new(),
        epochs: labels.iter().map(|r| vec![0; r.len()]).collect(),
        seq: 0,
    };
    for (i, row) in labels.iter().enumerate() {
        for (n, label) in row.iter().enumerate() {
            if let NodeLabel::Infected(k) = *label {
                clocks.arm_infected(0.0, i, n, k as usize, &mut rng);
            }
        }
    }

    let mut processed = 0u64;
    while let Some(clock) = clocks.heap.pop() {
        if clock.time > config.horizon {
            break;
        }
        if clock.epoch != clocks.epochs[clock.island][clock.node] {
            continue;
        }
        if processed == config.event_cap {
            return Err(CtmcError::EventCapExceeded { cap: config.event_cap, partial: Box::new(traj) });
        }
        processed += 1;
        let NodeLabel::Infected(strain) = labels[clock.island][clock.node] else {
            unreachable!("live clock on a healthy node");
        };
        let strain = strain as usize;
        match clock.kind {
            ClockKind::Heal => {
                labels[clock.island][clock.node] = NodeLabel::Healthy;
                clocks.epochs[clock.island][clock.node] += 1;
                let event = Event::Healing { island: clock.island, strain };
                state.apply(event);
                traj.push(clock.time, event, &state);
            }
            ClockKind::Attempt { target_island, rate } => {
                let target = rng.below(u64::from(sizes[target_island])) as usize;
                if labels[target_island][target] == NodeLabel::Healthy {
                    labels[target_island][target] = NodeLabel::Infected(strain as u16);
                    clocks.arm_infected(clock.time, target_island, target, strain, &mut rng);
                    let event = Event::Infection { island: target_island, strain };
                    state.apply(event);
                    traj.push(clock.time, event, &state);
                }
                clocks.push(
                    clock.time + rng.exponential(rate),
                    clock.island,
                    clock.node,
                    ClockKind::Attempt { target_island, rate },
                );
            }
        }
        if state.is_zero() {
            traj.absorbed_at = Some(clock.time);
            break;
        }
    }
    Ok(traj)
}
