// SPDX-License-Identifier: Apache-2.0
//! Simulation-versus-ODE distances across a growing size schedule.

use rayon::prelude::*;
use serde::Serialize;

use super::stats::{power_law_exponent, quantile, sample_variance, variance_std_error};
use super::{extract_martingale, martingale_variance_bound, sup_distance, AnalysisError, BoundForm, MIN_ENSEMBLE};
use crate::ctmc::{simulate_macro, MacroState, SimConfig, DEFAULT_EVENT_CAP};
use crate::meanfield::{integrate, FractionState, IntegratorConfig, MeanFieldSystem, DEFAULT_STEP};
use crate::path::uniform_grid;
use crate::topology::{Network, SizeSchedule};

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceConfig {
    pub horizon: f64,
    /// Spacing of the comparison grid.
    pub stride: f64,
    /// RK4 step for the reference solution.
    pub step: f64,
    pub replicas: usize,
    pub seed: u64,
    pub event_cap: u64,
    /// Times at which martingale variances are recorded.
    pub checkpoints: Vec<f64>,
    pub bound_form: BoundForm,
}

impl ConvergenceConfig {
    pub fn new(horizon: f64, stride: f64, replicas: usize, seed: u64) -> Self {
        ConvergenceConfig {
            horizon,
            stride,
            step: DEFAULT_STEP,
            replicas,
            seed,
            event_cap: DEFAULT_EVENT_CAP,
            checkpoints: Vec::new(),
            bound_form: BoundForm::default(),
        }
    }
}

/// How the requested initial fractions were realized as integer counts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rounding {
    pub requested: Vec<Vec<f64>>,
    pub counts: Vec<Vec<u32>>,
    pub max_abs_error: f64,
}

/// Rounds `y0 · N_i` to the nearest integer per class, then removes any
/// excess over `N_i` one node at a time from the largest class of the island.
pub fn realize_initial(y0: &FractionState, sizes: &[u32]) -> (MacroState, Rounding) {
    let k = y0.strains;
    let mut state = MacroState::zeros(y0.islands, k);
    for (i, &n) in sizes.iter().enumerate() {
        for s in 0..k {
            let c = (y0.get(i, s).max(0.0) * f64::from(n)).round().min(f64::from(n));
            state.set(i, s, c as u32);
        }
        while state.island_total(i) > n {
            let big = (0..k).max_by_key(|&s| (state.get(i, s), std::cmp::Reverse(s))).expect("strains > 0");
            state.set(i, big, state.get(i, big) - 1);
        }
    }
    let realized = state.fractions(sizes);
    let max_abs_error = realized.iter().zip(&y0.values).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let counts = state.as_slice().chunks(k).map(<[u32]>::to_vec).collect();
    (state, Rounding { requested: y0.rows(), counts, max_abs_error })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarCheck {
    pub t: f64,
    pub island: usize,
    pub strain: usize,
    pub variance: f64,
    pub std_error: f64,
    pub bound: f64,
    /// `None` when the ensemble is too small for the check.
    pub pass: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntryReport {
    #[serde(rename = "N")]
    pub sizes: Vec<u32>,
    /// Sup-norm error of each replica, in replica order.
    pub errors: Vec<f64>,
    pub median: f64,
    pub q10: f64,
    pub q90: f64,
    pub var_checks: Vec<VarCheck>,
    pub rounding: Rounding,
    pub ode_projections: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub entries: Vec<EntryReport>,
    /// Fitted exponent of median error against the geometric-mean island size.
    pub beta: Option<f64>,
}

impl ConvergenceReport {
    pub fn medians(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.median).collect()
    }

    pub fn medians_strictly_decreasing(&self) -> bool {
        self.medians().windows(2).all(|w| w[1] < w[0])
    }

    /// No entry's median exceeds `slack` times the previous one.
    pub fn medians_weakly_decreasing(&self, slack: f64) -> bool {
        self.medians().windows(2).all(|w| w[1] <= slack * w[0])
    }

    /// Flat `N_0,…,replica,error` table.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        let m = self.entries.first().map_or(0, |e| e.sizes.len());
        let header: Vec<String> = (0..m).map(|i| format!("N_{i}")).chain(["replica".into(), "error".into()]).collect();
        writeln!(w, "{}", header.join(","))?;
        for e in &self.entries {
            let sizes: Vec<String> = e.sizes.iter().map(u32::to_string).collect();
            for (r, err) in e.errors.iter().enumerate() {
                writeln!(w, "{},{r},{}", sizes.join(","), crate::io::fmt17(*err))?;
            }
        }
        Ok(())
    }
}

fn geometric_mean(sizes: &[u32]) -> f64 {
    (sizes.iter().map(|&n| f64::from(n).ln()).sum::<f64>() / sizes.len() as f64).exp()
}

/// Replica `r` of schedule entry `e` uses stream `(e << 32) | r`.
pub fn sweep_replica_index(entry: usize, replica: usize) -> u64 {
    ((entry as u64) << 32) | replica as u64
}

/// For every schedule entry, runs `replicas` simulations from the rounded
/// `y0` and measures each one's sup-norm distance to the ODE (finite-size
/// ratios, started from the same rounded fractions) on a common grid.
pub fn convergence_sweep(
    network: &Network,
    schedule: &SizeSchedule,
    y0: &FractionState,
    config: &ConvergenceConfig,
) -> Result<ConvergenceReport, AnalysisError> {
    schedule.validate(network, f64::INFINITY)?;
    if y0.islands != network.num_islands() || y0.strains != network.num_strains() {
        return Err(AnalysisError::ShapeMismatch);
    }
    y0.validate(0.0)?;
    if config.replicas == 0 {
        return Err(AnalysisError::EnsembleTooSmall { found: 0, required: 1 });
    }
    let grid = uniform_grid(config.horizon, config.stride);
    let sim = SimConfig::new(config.horizon).with_event_cap(config.event_cap);
    let integrator = IntegratorConfig::new(config.step).with_stride(config.stride);
    let mut checkpoints = config.checkpoints.clone();
    checkpoints.sort_by(f64::total_cmp);

    let mut entries = Vec::with_capacity(schedule.entries.len());
    for (e, sizes) in schedule.entries.iter().enumerate() {
        let (initial, rounding) = realize_initial(y0, sizes);
        let start = FractionState { islands: y0.islands, strains: y0.strains, values: initial.fractions(sizes) };
        let sys = MeanFieldSystem::from_sizes(network, sizes)?;
        let ode = integrate(&sys, &start, config.horizon, &integrator)?;

        let runs: Vec<(f64, Vec<f64>)> = (0..config.replicas)
            .into_par_iter()
            .map(|r| -> Result<(f64, Vec<f64>), AnalysisError> {
                let traj = simulate_macro(network, sizes, &initial, &sim, config.seed, sweep_replica_index(e, r))?;
                let err = sup_distance(&traj.sample_fractions(&grid, sizes), &ode.path)?;
                let mart = extract_martingale(network, sizes, &traj, &checkpoints)?;
                Ok((err, mart.path.values))
            })
            .collect::<Result<_, _>>()?;

        let errors: Vec<f64> = runs.iter().map(|(err, _)| *err).collect();
        let w = sys.width();
        let k = network.num_strains();
        let mut var_checks = Vec::new();
        for (n, &t) in checkpoints.iter().enumerate() {
            for c in 0..w {
                let xs: Vec<f64> = runs.iter().map(|(_, v)| v[n * w + c]).collect();
                let variance = sample_variance(&xs);
                let std_error = variance_std_error(&xs);
                let bound = martingale_variance_bound(network, sizes, c / k, c % k, t, config.bound_form);
                let pass = (xs.len() >= MIN_ENSEMBLE).then_some(variance <= bound + 3.0 * std_error);
                var_checks.push(VarCheck { t, island: c / k, strain: c % k, variance, std_error, bound, pass });
            }
        }
        entries.push(EntryReport {
            sizes: sizes.clone(),
            median: quantile(&errors, 0.5),
            q10: quantile(&errors, 0.1),
            q90: quantile(&errors, 0.9),
            errors,
            var_checks,
            rounding,
            ode_projections: ode.projections,
        });
    }

    let beta = if entries.len() >= 2 {
        let x: Vec<f64> = entries.iter().map(|e| geometric_mean(&e.sizes)).collect();
        let y: Vec<f64> = entries.iter().map(|e| e.median).collect();
        power_law_exponent(&x, &y)
    } else {
        None
    };
    Ok(ConvergenceReport { entries, beta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{bipartite_multi, validate_spec};

    #[test]
    fn rounding_caps_island_totals() {
        let y0 = FractionState::from_rows(&[vec![0.5, 0.5], vec![0.26, 0.25]]).unwrap();
        let (state, rounding) = realize_initial(&y0, &[3, 4]);
        // 1.5 and 1.5 round to 2 + 2 > 3; one node comes off the first largest class
        assert_eq!(rounding.counts, vec![vec![1, 2], vec![1, 1]]);
        assert!(state.validate(&[3, 4]).is_ok());
        assert!(rounding.max_abs_error > 0.0);
    }

    #[test]
    fn single_entry_sweep_is_degenerate() {
        let net = validate_spec(bipartite_multi(&[2.0, 1.5], 1.0, [50, 50])).unwrap();
        let y0 = FractionState::from_rows(&[vec![0.25, 0.25], vec![0.25, 0.25]]).unwrap();
        let cfg = ConvergenceConfig::new(2.0, 0.01, 1, 5);
        let report = convergence_sweep(&net, &SizeSchedule::new(vec![vec![50, 50]]), &y0, &cfg).unwrap();
        assert_eq!(report.entries.len(), 1);
        assert_eq!(report.entries[0].errors.len(), 1);
        assert_eq!(report.beta, None);
        let e = &report.entries[0];
        assert!(e.q10 <= e.median && e.median <= e.q90 && e.errors[0] >= 0.0);
    }

    #[test]
    fn parallel_sweep_is_deterministic() {
        let net = validate_spec(bipartite_multi(&[2.0, 1.5], 1.0, [50, 50])).unwrap();
        let y0 = FractionState::from_rows(&[vec![0.25, 0.25], vec![0.25, 0.25]]).unwrap();
        let mut cfg = ConvergenceConfig::new(2.0, 0.05, 8, 9);
        cfg.checkpoints = vec![1.0];
        let sched = SizeSchedule::new(vec![vec![40, 40], vec![80, 80]]);
        let a = convergence_sweep(&net, &sched, &y0, &cfg).unwrap();
        let b = convergence_sweep(&net, &sched, &y0, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.entries[0].var_checks.iter().all(|v| v.pass.is_none()));
    }
}
