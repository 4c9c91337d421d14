// SPDX-License-Identifier: Apache-2.0
//! Finite generator of the island-level chain for small island sizes.

use std::collections::HashMap;
use std::io::{self, Write};

use super::{CtmcError, MacroState, RateModel};
use crate::topology::Network;

pub const DEFAULT_STATE_CAP: usize = 200_000;

/// Rate matrix over an enumerated state list, stored by rows.
#[derive(Debug, Clone)]
pub struct GeneratorMatrix {
    islands: usize,
    strains: usize,
    /// flat `n_states × islands × strains`
    states: Vec<u32>,
    index: HashMap<Vec<u32>, usize>,
    /// off-diagonal `(column, rate)` per row, rate > 0
    rows: Vec<Vec<(usize, f64)>>,
    diag: Vec<f64>,
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// `Π_i C(N_i + K, K)`: the number of count matrices with `Σ_k Y[i][k] ≤ N_i`.
pub fn count_states(sizes: &[u32], strains: usize) -> u128 {
    sizes
        .iter()
        .map(|&n| binomial(u128::from(n) + strains as u128, strains as u128))
        .fold(1u128, u128::saturating_mul)
}

/// Every composition `(c_0, …, c_{K-1})` with sum at most `n`, lexicographic.
fn compositions(n: u32, strains: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; strains];
    fn rec(pos: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if pos == cur.len() {
            out.push(cur.clone());
            return;
        }
        for c in 0..=left {
            cur[pos] = c;
            rec(pos + 1, left - c, cur, out);
        }
        cur[pos] = 0;
    }
    rec(0, n, &mut cur, &mut out);
    out
}

/// Enumerates the state space and fills the rate matrix from the transition
/// rates. Fails when the space exceeds `state_cap` states.
pub fn build_generator(
    network: &Network,
    sizes: &[u32],
    state_cap: usize,
) -> Result<GeneratorMatrix, CtmcError> {
    let model = RateModel::new(network, sizes)?;
    let (m, k) = (model.islands(), model.strains());
    let count = count_states(sizes, k);
    if count > state_cap as u128 {
        return Err(CtmcError::StateSpaceTooLarge { count, cap: state_cap });
    }
    let per_island: Vec<Vec<Vec<u32>>> = sizes.iter().map(|&n| compositions(n, k)).collect();
    let n_states = count as usize;
    let mut states = Vec::with_capacity(n_states * m * k);
    let mut digits = vec![0usize; m];
    for _ in 0..n_states {
        for (i, &d) in digits.iter().enumerate() {
            states.extend_from_slice(&per_island[i][d]);
        }
        // mixed-radix increment, last island fastest
        for i in (0..m).rev() {
            digits[i] += 1;
            if digits[i] < per_island[i].len() {
                break;
            }
            digits[i] = 0;
        }
    }
    let w = m * k;
    let index: HashMap<Vec<u32>, usize> =
        states.chunks(w).enumerate().map(|(s, c)| (c.to_vec(), s)).collect();

    let mut rows = Vec::with_capacity(n_states);
    let mut diag = Vec::with_capacity(n_states);
    let mut buf = vec![0.0; model.num_slots()];
    for s in 0..n_states {
        let counts = &states[s * w..(s + 1) * w];
        model.rates_into(counts, &mut buf);
        let mut row = Vec::new();
        let mut out = 0.0;
        for (slot, &rate) in buf.iter().enumerate() {
            if rate > 0.0 {
                let mut target = MacroState::from_flat(m, k, counts.to_vec());
                target.apply(model.slot_event(slot));
                let col = index[target.as_slice()];
                row.push((col, rate));
                out += rate;
            }
        }
        rows.push(row);
        diag.push(-out);
    }
    Ok(GeneratorMatrix { islands: m, strains: k, states, index, rows, diag })
}

impl GeneratorMatrix {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn state(&self, s: usize) -> MacroState {
        let w = self.islands * self.strains;
        MacroState::from_flat(self.islands, self.strains, self.states[s * w..(s + 1) * w].to_vec())
    }

    pub fn index_of(&self, state: &MacroState) -> Option<usize> {
        self.index.get(state.as_slice()).copied()
    }

    pub fn index_of_counts(&self, counts: &[u32]) -> Option<usize> {
        self.index.get(counts).copied()
    }

    /// Off-diagonal entries of row `s`.
    pub fn row(&self, s: usize) -> &[(usize, f64)] {
        &self.rows[s]
    }

    pub fn diagonal(&self, s: usize) -> f64 {
        self.diag[s]
    }

    pub fn max_exit_rate(&self) -> f64 {
        self.diag.iter().fold(0.0, |acc, &d| acc.max(-d))
    }

    /// Point mass on `state`.
    pub fn point_mass(&self, state: &MacroState) -> Option<Vec<f64>> {
        let idx = self.index_of(state)?;
        let mut p = vec![0.0; self.len()];
        p[idx] = 1.0;
        Some(p)
    }

    /// Row-major dense copy; for small spaces only.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        let mut q = vec![vec![0.0; n]; n];
        for s in 0..n {
            q[s][s] = self.diag[s];
            for &(c, r) in &self.rows[s] {
                q[s][c] += r;
            }
        }
        q
    }

    /// Coordinate list `row col rate`, one entry per line, diagonal included.
    pub fn write_coordinate_list<W: Write>(&self, mut w: W) -> io::Result<()> {
        for s in 0..self.len() {
            let mut entries: Vec<(usize, f64)> = self.rows[s].clone();
            entries.push((s, self.diag[s]));
            entries.sort_by_key(|&(c, _)| c);
            for (c, r) in entries {
                writeln!(w, "{s} {c} {}", crate::io::fmt17(r))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{bipartite_multi, bipartite_single, validate_spec};

    #[test]
    fn state_counts() {
        let net = validate_spec(bipartite_single(2.0, 1.0, [3, 3])).unwrap();
        assert_eq!(build_generator(&net, &[3, 3], DEFAULT_STATE_CAP).unwrap().len(), 16);
        let net = validate_spec(bipartite_multi(&[2.0, 1.0], 1.0, [2, 2])).unwrap();
        let gen = build_generator(&net, &[2, 2], DEFAULT_STATE_CAP).unwrap();
        assert_eq!(gen.len(), 36);
        assert_eq!(compositions(2, 2).len(), 6);
    }

    #[test]
    fn rows_sum_to_zero_and_jumps_are_unit() {
        let net = validate_spec(bipartite_multi(&[2.0, 1.5], 1.0, [3, 2])).unwrap();
        let gen = build_generator(&net, &[3, 2], DEFAULT_STATE_CAP).unwrap();
        for s in 0..gen.len() {
            let sum: f64 = gen.row(s).iter().map(|&(_, r)| r).sum::<f64>() + gen.diagonal(s);
            assert!(sum.abs() <= 1e-12);
            let from = gen.state(s);
            for &(c, r) in gen.row(s) {
                assert!(r > 0.0);
                let to = gen.state(c);
                let dist: u32 = from
                    .as_slice()
                    .iter()
                    .zip(to.as_slice())
                    .map(|(&a, &b)| a.abs_diff(b))
                    .sum();
                assert_eq!(dist, 1);
            }
        }
        let zero = gen.index_of(&MacroState::zeros(2, 2)).unwrap();
        assert!(gen.row(zero).is_empty());
        assert_eq!(gen.diagonal(zero), 0.0);
    }

    #[test]
    fn cap_enforced() {
        let net = validate_spec(bipartite_single(2.0, 1.0, [50, 50])).unwrap();
        assert!(build_generator(&net, &[50, 50], DEFAULT_STATE_CAP).is_ok());
        let net = validate_spec(bipartite_multi(&[2.0, 1.0], 1.0, [50, 50])).unwrap();
        assert!(matches!(
            build_generator(&net, &[50, 50], DEFAULT_STATE_CAP),
            Err(CtmcError::StateSpaceTooLarge { count: 1_758_276, .. })
        ));
    }
}
