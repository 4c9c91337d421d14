// SPDX-License-Identifier: Apache-2.0
//! `M̄(t) = Ȳ(t) − Ȳ(0) − ∫₀ᵗ F_N(Ȳ(s−)) ds`, where `F_N` is the vector field
//! with the finite ratios `N_j / N_i`. This is exactly the compensated
//! residual of the jump process at size `N`, so it has mean zero.

use super::AnalysisError;
use crate::ctmc::{fractions_into, Trajectory};
use crate::meanfield::MeanFieldSystem;
use crate::path::SampledPath;
use crate::topology::Network;

#[derive(Debug, Clone, PartialEq)]
pub struct MartingalePath {
    pub path: SampledPath,
}

impl MartingalePath {
    pub fn value_at_index(&self, n: usize) -> &[f64] {
        self.path.row(n)
    }
}

/// Residual on `grid`. The drift integral is accumulated jump to jump, so
/// values do not depend on which grid points are requested.
pub fn extract_martingale(
    network: &Network,
    sizes: &[u32],
    traj: &Trajectory,
    grid: &[f64],
) -> Result<MartingalePath, AnalysisError> {
    if traj.islands() != network.num_islands() || traj.strains() != network.num_strains() {
        return Err(AnalysisError::ShapeMismatch);
    }
    network.check_sizes(sizes)?;
    if grid.windows(2).any(|p| p[1] < p[0]) || grid.first().is_some_and(|&t| t < 0.0) {
        return Err(AnalysisError::UnsortedGrid);
    }
    if let Some(&last) = grid.last() {
        if last > traj.horizon {
            return Err(AnalysisError::GridBeyondHorizon { time: last, horizon: traj.horizon });
        }
    }
    let sys = MeanFieldSystem::from_sizes(network, sizes)?;
    let w = sys.width();
    let y0 = traj.initial.fractions(sizes);
    let mut y = y0.clone();
    let mut f = vec![0.0; w];
    sys.field_into(&y, &mut f);
    let mut drift = vec![0.0; w];
    let mut t_last = 0.0;
    let mut next_jump = 0;
    let mut values = Vec::with_capacity(grid.len() * w);
    for &g in grid {
        while next_jump < traj.len() && traj.times[next_jump] <= g {
            let t = traj.times[next_jump];
            for (d, &fv) in drift.iter_mut().zip(&f) {
                *d += fv * (t - t_last);
            }
            t_last = t;
            fractions_into(traj.strains(), traj.state_after(next_jump), sizes, &mut y);
            sys.field_into(&y, &mut f);
            next_jump += 1;
        }
        let dt = g - t_last;
        values.extend((0..w).map(|n| y[n] - y0[n] - (drift[n] + f[n] * dt)));
    }
    Ok(MartingalePath { path: SampledPath::new(grid.to_vec(), w, values) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ctmc::{simulate_macro, MacroState, SimConfig};
    use crate::path::uniform_grid;
    use crate::topology::{bipartite_multi, bipartite_single, validate_spec};

    #[test]
    fn absorbing_path_has_zero_residual() {
        let net = validate_spec(bipartite_single(2.0, 1.0, [4, 4])).unwrap();
        let traj = Trajectory::new(MacroState::zeros(2, 1), 3.0);
        let m = extract_martingale(&net, &[4, 4], &traj, &uniform_grid(3.0, 0.5)).unwrap();
        assert!(m.path.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn one_jump_hand_evaluation() {
        // Y = (1, 0) on N = (4, 4), a single healing at s = 0.7
        let mu = 1.3;
        let net = validate_spec(bipartite_single(2.0, mu, [4, 4])).unwrap();
        let mut traj = Trajectory::new(MacroState::from_rows(&[vec![1], vec![0]]).unwrap(), 2.0);
        let s = 0.7;
        traj.push(s, crate::ctmc::Event::Healing { island: 0, strain: 0 }, &MacroState::zeros(2, 1));
        let grid = [0.0, 0.3, s, 1.5];
        let m = extract_martingale(&net, &[4, 4], &traj, &grid).unwrap();
        assert_eq!(m.value_at_index(0), &[0.0, 0.0]);
        // island 0 before the jump: −∫F₀ = μ/4 · t
        assert!((m.value_at_index(1)[0] - mu * 0.25 * 0.3).abs() < 1e-15);
        let at_s = -0.25 + mu * s / 4.0;
        assert!((m.value_at_index(2)[0] - at_s).abs() < 1e-15);
        assert!((m.value_at_index(3)[0] - at_s).abs() < 1e-15);
        // island 1: F₁ = γ (N₀/N₁) Ȳ₀ (1 − Ȳ₁) = 2 · 0.25 before s
        assert!((m.value_at_index(2)[1] + 0.5 * s).abs() < 1e-15);
    }

    #[test]
    fn drift_independent_of_grid() {
        let net = validate_spec(bipartite_multi(&[2.0, 1.5], 1.0, [30, 30])).unwrap();
        let init = MacroState::from_rows(&[vec![8, 8], vec![8, 8]]).unwrap();
        let traj = simulate_macro(&net, &[30, 30], &init, &SimConfig::new(4.0), 11, 0).unwrap();
        let coarse = uniform_grid(4.0, 0.5);
        let mut fine = Vec::new();
        for pair in coarse.windows(2) {
            fine.extend((0..10).map(|j| pair[0] + (pair[1] - pair[0]) * j as f64 / 10.0));
        }
        fine.push(4.0);
        let a = extract_martingale(&net, &[30, 30], &traj, &coarse).unwrap();
        let b = extract_martingale(&net, &[30, 30], &traj, &fine).unwrap();
        for (n, &t) in coarse.iter().enumerate() {
            let m = fine.iter().position(|&s| s == t).expect("coarse grid inside fine grid");
            assert_eq!(a.value_at_index(n), b.value_at_index(m));
        }
    }

    #[test]
    fn grid_past_horizon_rejected() {
        let net = validate_spec(bipartite_single(2.0, 1.0, [4, 4])).unwrap();
        let traj = Trajectory::new(MacroState::zeros(2, 1), 1.0);
        assert!(matches!(
            extract_martingale(&net, &[4, 4], &traj, &[0.0, 1.5]),
            Err(AnalysisError::GridBeyondHorizon { .. })
        ));
    }
}
