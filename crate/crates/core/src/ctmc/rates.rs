// SPDX-License-Identifier: Apache-2.0
use super::{CtmcError, Event, MacroState};
use crate::topology::Network;

/// Island-level transition rates of the jump process for one size vector.
///
/// Rates are laid out in scan order: island-major, strain-minor, healing
/// before infection, i.e. slot `2 * (i * K + k)` heals and `2 * (i * K + k) + 1`
/// infects class `(i, k)`.
#[derive(Debug, Clone)]
pub struct RateModel {
    islands: usize,
    strains: usize,
    sizes: Vec<u32>,
    inv_sizes: Vec<f64>,
    /// mu[i * K + k]
    mu: Vec<f64>,
    /// sources[i * K + k] = (j, gamma^k_{ji}) for every j adjacent to i with a positive rate
    sources: Vec<Vec<(usize, f64)>>,
}

impl RateModel {
    pub fn new(network: &Network, sizes: &[u32]) -> Result<Self, CtmcError> {
        network.check_sizes(sizes)?;
        let m = network.num_islands();
        let k = network.num_strains();
        let mut mu = Vec::with_capacity(m * k);
        let mut sources = Vec::with_capacity(m * k);
        for i in 0..m {
            for s in 0..k {
                mu.push(network.mu(s, i));
                sources.push(
                    network
                        .neighbors(i)
                        .iter()
                        .map(|&j| (j, network.gamma(s, j, i)))
                        .filter(|&(_, g)| g > 0.0)
                        .collect(),
                );
            }
        }
        Ok(RateModel {
            islands: m,
            strains: k,
            sizes: sizes.to_vec(),
            inv_sizes: sizes.iter().map(|&n| 1.0 / f64::from(n)).collect(),
            mu,
            sources,
        })
    }

    pub fn islands(&self) -> usize {
        self.islands
    }

    pub fn strains(&self) -> usize {
        self.strains
    }

    pub fn sizes(&self) -> &[u32] {
        &self.sizes
    }

    pub fn num_slots(&self) -> usize {
        2 * self.islands * self.strains
    }

    #[inline]
    pub fn slot_event(&self, slot: usize) -> Event {
        let class = slot / 2;
        let island = class / self.strains;
        let strain = class % self.strains;
        if slot.is_multiple_of(2) {
            Event::Healing { island, strain }
        } else {
            Event::Infection { island, strain }
        }
    }

    /// Fills `out` (length [`num_slots`](Self::num_slots)) and returns the total.
    pub fn rates_into(&self, counts: &[u32], out: &mut [f64]) -> f64 {
        let k = self.strains;
        let mut total = 0.0;
        for i in 0..self.islands {
            let row = &counts[i * k..(i + 1) * k];
            let infected: u32 = row.iter().sum();
            let healthy_frac = f64::from(self.sizes[i] - infected) * self.inv_sizes[i];
            for s in 0..k {
                let class = i * k + s;
                let heal = self.mu[class] * f64::from(row[s]);
                let pressure: f64 = self.sources[class]
                    .iter()
                    .map(|&(j, g)| g * f64::from(counts[j * k + s]))
                    .sum();
                let infect = pressure * healthy_frac;
                out[2 * class] = heal;
                out[2 * class + 1] = infect;
                total += heal + infect;
            }
        }
        total
    }
}

/// All positive-rate transitions out of `state`, in scan order.
pub fn transition_rates(
    network: &Network,
    sizes: &[u32],
    state: &MacroState,
) -> Result<Vec<(Event, f64)>, CtmcError> {
    let model = RateModel::new(network, sizes)?;
    if state.islands() != model.islands() || state.strains() != model.strains() {
        return Err(CtmcError::InvalidState("state shape does not match network".into()));
    }
    state.validate(sizes)?;
    let mut buf = vec![0.0; model.num_slots()];
    model.rates_into(state.as_slice(), &mut buf);
    Ok(buf
        .iter()
        .enumerate()
        .filter(|&(_, &r)| r > 0.0)
        .map(|(slot, &r)| (model.slot_event(slot), r))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{bipartite_single, validate_spec};

    #[test]
    fn hand_evaluated_bipartite_rates() {
        let net = validate_spec(bipartite_single(2.0, 1.0, [4, 4])).unwrap();
        let state = MacroState::from_rows(&[vec![1], vec![2]]).unwrap();
        let rates = transition_rates(&net, &[4, 4], &state).unwrap();
        let heal0 = rates.iter().find(|(e, _)| *e == Event::Healing { island: 0, strain: 0 }).unwrap().1;
        let inf0 = rates.iter().find(|(e, _)| *e == Event::Infection { island: 0, strain: 0 }).unwrap().1;
        assert_eq!(heal0, 1.0);
        assert_eq!(inf0, 3.0);
        // island 1: healing 2, infection (2 * 1) * (4 - 2) / 4 = 1
        assert_eq!(rates[2], (Event::Healing { island: 1, strain: 0 }, 2.0));
        assert_eq!(rates[3], (Event::Infection { island: 1, strain: 0 }, 1.0));
    }

    #[test]
    fn disease_free_state_has_no_rates() {
        let net = validate_spec(bipartite_single(2.0, 1.0, [4, 4])).unwrap();
        let rates = transition_rates(&net, &[4, 4], &MacroState::zeros(2, 1)).unwrap();
        assert!(rates.is_empty());
    }

    #[test]
    fn full_island_receives_no_infection() {
        let net = validate_spec(crate::topology::bipartite_multi(&[2.0, 1.0], 1.0, [3, 3])).unwrap();
        let state = MacroState::from_rows(&[vec![2, 1], vec![1, 1]]).unwrap();
        let rates = transition_rates(&net, &[3, 3], &state).unwrap();
        assert!(rates.iter().all(|(e, _)| !matches!(e, Event::Infection { island: 0, .. })));
        assert!(rates.iter().any(|(e, _)| matches!(e, Event::Infection { island: 1, .. })));
    }

    #[test]
    fn over_full_state_rejected() {
        let net = validate_spec(bipartite_single(2.0, 1.0, [2, 2])).unwrap();
        let state = MacroState::from_rows(&[vec![3], vec![0]]).unwrap();
        assert!(matches!(
            transition_rates(&net, &[2, 2], &state),
            Err(CtmcError::InvalidState(_))
        ));
    }
}
