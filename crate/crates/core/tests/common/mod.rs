// SPDX-License-Identifier: Apache-2.0
#![allow(dead_code, clippy::needless_range_loop)]

use sisnet_core::rng::SimRng;
use sisnet_core::topology::{validate_spec, Network, NetworkSpec};
use sisnet_core::MacroState;

/// A random valid network: symmetric adjacency without self-loops, rates on
/// edges only, every island size in `1..=max_size`.
pub fn random_network(rng: &mut SimRng, max_islands: usize, max_strains: usize, max_size: u32) -> Network {
    let m = 2 + rng.below(max_islands as u64 - 1) as usize;
    let k = 1 + rng.below(max_strains as u64) as usize;
    let mut adjacency = vec![vec![false; m]; m];
    for i in 0..m {
        for j in (i + 1)..m {
            let edge = j == i + 1 || rng.uniform() < 0.5;
            adjacency[i][j] = edge;
            adjacency[j][i] = edge;
        }
    }
    let gamma = (0..k)
        .map(|_| {
            (0..m)
                .map(|from| (0..m).map(|to| if adjacency[from][to] { 3.0 * rng.uniform() } else { 0.0 }).collect())
                .collect()
        })
        .collect();
    let mu = (0..k).map(|_| (0..m).map(|_| 0.5 + 1.5 * rng.uniform()).collect()).collect();
    let sizes = (0..m).map(|_| 1 + rng.below(u64::from(max_size)) as u32).collect();
    validate_spec(NetworkSpec {
        num_islands: m,
        num_strains: k,
        island_sizes: sizes,
        island_adjacency: adjacency,
        infection_rates: gamma,
        healing_rates: mu,
    })
    .expect("generator builds valid networks")
}

/// A random valid state: each island's infected nodes split over strains.
pub fn random_state(rng: &mut SimRng, sizes: &[u32], strains: usize) -> MacroState {
    let mut state = MacroState::zeros(sizes.len(), strains);
    for (i, &n) in sizes.iter().enumerate() {
        let mut left = rng.below(u64::from(n) + 1) as u32;
        for s in 0..strains {
            let c = if s + 1 == strains { left } else { rng.below(u64::from(left) + 1) as u32 };
            state.set(i, s, c);
            left -= c;
        }
    }
    state
}

/// Random fractions with every island's total below one.
pub fn random_fractions(rng: &mut SimRng, islands: usize, strains: usize) -> Vec<f64> {
    let mut y = Vec::with_capacity(islands * strains);
    for _ in 0..islands {
        let total = 0.95 * rng.uniform();
        let weights: Vec<f64> = (0..strains).map(|_| rng.uniform() + 1e-3).collect();
        let sum: f64 = weights.iter().sum();
        y.extend(weights.iter().map(|w| total * w / sum));
    }
    y
}
