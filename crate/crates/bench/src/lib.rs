// SPDX-License-Identifier: Apache-2.0
//! Fixtures shared by the benchmarks.

use sisnet_core::topology::{bipartite_multi, validate_spec, Network};
use sisnet_core::{FractionState, MacroState};

/// Two islands, two competing strains with infection rates 2 and 1.5 and
/// unit healing.
pub fn two_strain_bipartite(n: u32) -> Network {
    validate_spec(bipartite_multi(&[2.0, 1.5], 1.0, [n, n])).expect("fixture network is valid")
}

/// A quarter of each island infected by each strain.
pub fn quarter_infected(n: u32) -> MacroState {
    let q = n / 4;
    MacroState::from_flat(2, 2, vec![q; 4])
}

pub fn quarter_fractions() -> FractionState {
    FractionState { islands: 2, strains: 2, values: vec![0.25; 4] }
}
