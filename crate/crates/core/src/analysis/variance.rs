// SPDX-License-Identifier: Apache-2.0
//! Ensemble checks on martingale residuals.
//!
//! With independent infection and healing clocks,
//! `E[M̄_ik(t)²] = N_i⁻² E∫₀ᵗ (λ⁺_ik + λ⁻_ik) ds`, and the infection rate
//! `λ⁺_ik = Σ_j γ^k_{ji} Y_jk (N_i − ΣY_i)/N_i` never exceeds `Σ_j γ^k_{ji} N_j`.
//! The checked bound is
//! `B_ik(t) = 2 [Σ_{j∼i} γ^k_{ji} N_j / (c N_i²) + μ^k_i / N_i] t`,
//! with `c = 1` for [`BoundForm::Rigorous`] and `c = 4` for
//! [`BoundForm::Quartered`].

use serde::Serialize;

use super::stats::{mean, power_law_exponent, sample_variance, variance_std_error};
use super::{AnalysisError, MartingalePath};
use crate::topology::Network;

pub const MIN_ENSEMBLE: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum BoundForm {
    /// `c = 1`: follows from `Y_j (N_i − ΣY_i)/N_i ≤ N_j`.
    #[default]
    Rigorous,
    /// `c = 4`: tighter, not implied by the rate bound alone.
    Quartered,
}

impl BoundForm {
    fn divisor(self) -> f64 {
        match self {
            BoundForm::Rigorous => 1.0,
            BoundForm::Quartered => 4.0,
        }
    }
}

pub fn martingale_variance_bound(
    network: &Network,
    sizes: &[u32],
    island: usize,
    strain: usize,
    t: f64,
    form: BoundForm,
) -> f64 {
    let ni = f64::from(sizes[island]);
    let inflow: f64 = network
        .neighbors(island)
        .iter()
        .map(|&j| network.gamma(strain, j, island) * f64::from(sizes[j]))
        .sum();
    2.0 * (inflow / (form.divisor() * ni * ni) + network.mu(strain, island) / ni) * t
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceEntry {
    pub island: usize,
    pub strain: usize,
    pub mean: f64,
    pub variance: f64,
    pub std_error: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceCheck {
    pub time: f64,
    pub sizes: Vec<u32>,
    pub form: BoundForm,
    pub entries: Vec<VarianceEntry>,
    pub pass: bool,
}

fn sample_index(paths: &[MartingalePath], t: f64) -> Result<usize, AnalysisError> {
    let first = &paths[0].path;
    if paths.iter().any(|p| p.path.times != first.times || p.path.width != first.width) {
        return Err(AnalysisError::GridMismatch);
    }
    first
        .times
        .iter()
        .position(|&s| (s - t).abs() <= 1e-12 * t.abs().max(1.0))
        .ok_or(AnalysisError::TimeNotOnGrid(t))
}

fn column(paths: &[MartingalePath], n: usize, c: usize) -> Vec<f64> {
    paths.iter().map(|p| p.value_at_index(n)[c]).collect()
}

/// Sample variance of every coordinate at `t` against `B_ik(t)`. A coordinate
/// passes when its variance is at most the bound plus three standard errors
/// of the variance estimate.
pub fn martingale_variance_check(
    network: &Network,
    sizes: &[u32],
    paths: &[MartingalePath],
    t: f64,
    form: BoundForm,
) -> Result<VarianceCheck, AnalysisError> {
    if paths.len() < MIN_ENSEMBLE {
        return Err(AnalysisError::EnsembleTooSmall { found: paths.len(), required: MIN_ENSEMBLE });
    }
    network.check_sizes(sizes)?;
    let n = sample_index(paths, t)?;
    let k = network.num_strains();
    if paths[0].path.width != network.num_islands() * k {
        return Err(AnalysisError::ShapeMismatch);
    }
    let entries: Vec<VarianceEntry> = (0..paths[0].path.width)
        .map(|c| {
            let xs = column(paths, n, c);
            let variance = sample_variance(&xs);
            let std_error = variance_std_error(&xs);
            let bound = martingale_variance_bound(network, sizes, c / k, c % k, t, form);
            VarianceEntry {
                island: c / k,
                strain: c % k,
                mean: mean(&xs),
                variance,
                std_error,
                bound,
                pass: variance <= bound + 3.0 * std_error,
            }
        })
        .collect();
    let pass = entries.iter().all(|e| e.pass);
    Ok(VarianceCheck { time: t, sizes: sizes.to_vec(), form, entries, pass })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanCheck {
    pub island: usize,
    pub strain: usize,
    pub mean: f64,
    pub std_error: f64,
    /// `|mean| ≤ 3 · std_error`
    pub within: bool,
}

/// Ensemble mean of every coordinate at `t` compared with zero.
pub fn mean_zero_check(
    paths: &[MartingalePath],
    strains: usize,
    t: f64,
) -> Result<Vec<MeanCheck>, AnalysisError> {
    if paths.len() < 2 {
        return Err(AnalysisError::EnsembleTooSmall { found: paths.len(), required: 2 });
    }
    let n = sample_index(paths, t)?;
    Ok((0..paths[0].path.width)
        .map(|c| {
            let xs = column(paths, n, c);
            let m = mean(&xs);
            let se = (sample_variance(&xs) / xs.len() as f64).sqrt();
            MeanCheck { island: c / strains, strain: c % strains, mean: m, std_error: se, within: m.abs() <= 3.0 * se }
        })
        .collect())
}

/// Per coordinate, the fitted exponent of variance against `N_i` across
/// checks taken at different sizes. `None` where a variance is zero or
/// fewer than two sizes are available.
pub fn variance_exponents(checks: &[VarianceCheck]) -> Vec<Option<f64>> {
    let Some(first) = checks.first() else {
        return Vec::new();
    };
    (0..first.entries.len())
        .map(|c| {
            let island = first.entries[c].island;
            let x: Vec<f64> = checks.iter().map(|ch| f64::from(ch.sizes[island])).collect();
            let y: Vec<f64> = checks.iter().map(|ch| ch.entries[c].variance).collect();
            power_law_exponent(&x, &y)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::SampledPath;
    use crate::topology::{bipartite_single, validate_spec};

    #[test]
    fn bound_values() {
        let net = validate_spec(bipartite_single(2.0, 1.0, [100, 100])).unwrap();
        let q = martingale_variance_bound(&net, &[100, 100], 0, 0, 1.0, BoundForm::Quartered);
        assert!((q - 0.03).abs() < 1e-15);
        let r = martingale_variance_bound(&net, &[100, 100], 0, 0, 1.0, BoundForm::Rigorous);
        assert!((r - 0.06).abs() < 1e-15);
    }

    #[test]
    fn degenerate_ensemble_passes() {
        let net = validate_spec(bipartite_single(2.0, 1.0, [10, 10])).unwrap();
        let zero = MartingalePath { path: SampledPath::new(vec![0.0, 1.0], 2, vec![0.0; 4]) };
        let paths = vec![zero; 100];
        let check = martingale_variance_check(&net, &[10, 10], &paths, 1.0, BoundForm::Quartered).unwrap();
        assert!(check.pass);
        assert!(check.entries.iter().all(|e| e.variance == 0.0));
        assert!(matches!(
            martingale_variance_check(&net, &[10, 10], &paths[..10], 1.0, BoundForm::Rigorous),
            Err(AnalysisError::EnsembleTooSmall { found: 10, required: 100 })
        ));
        assert!(matches!(
            martingale_variance_check(&net, &[10, 10], &paths, 0.5, BoundForm::Rigorous),
            Err(AnalysisError::TimeNotOnGrid(_))
        ));
    }
}
