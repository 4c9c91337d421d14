// SPDX-License-Identifier: Apache-2.0
//! Equilibria of the vector field by damped Newton iteration.

use nalgebra::DVector;

use super::{FractionState, MeanFieldError, MeanFieldSystem};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub max_iterations: usize,
    /// Smallest damping factor tried before giving up on a step.
    pub min_damping: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions { max_iterations: 500, min_damping: 1e-10 }
    }
}

/// Local classification from the sign of the Jacobian's spectral abscissa.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    Stable,
    Unstable,
    /// Abscissa within 1e-9 of zero; linearization is inconclusive.
    Marginal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPoint {
    pub state: FractionState,
    /// `max |F_ik|` at `state`.
    pub residual: f64,
    pub iterations: usize,
    /// Largest real part among the Jacobian's eigenvalues.
    pub spectral_abscissa: f64,
    pub stability: Stability,
}

fn residual_norms(sys: &MeanFieldSystem, y: &[f64], f: &mut [f64]) -> (f64, f64) {
    sys.field_into(y, f);
    let max = f.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    let sq = f.iter().map(|v| v * v).sum();
    (max, sq)
}

/// Damped Newton on `F(y) = 0` from `guess`, staying inside the feasible set.
///
/// The result is local: it says nothing about other equilibria or their
/// basins.
pub fn fixed_point(
    sys: &MeanFieldSystem,
    guess: &FractionState,
    tol: f64,
    options: &NewtonOptions,
) -> Result<FixedPoint, MeanFieldError> {
    if !(tol > 0.0) {
        return Err(MeanFieldError::InvalidConfig(format!("tolerance {tol}")));
    }
    let w = sys.width();
    if guess.values.len() != w || guess.islands != sys.islands() || guess.strains != sys.strains() {
        return Err(MeanFieldError::DimensionMismatch { expected: w, found: guess.values.len() });
    }
    if guess.validate(0.0).is_err() {
        return Err(MeanFieldError::LeftFeasibleSet);
    }
    let strains = sys.strains();
    let mut y = guess.values.clone();
    let mut f = vec![0.0; w];
    let mut trial_f = vec![0.0; w];
    let (mut max_res, mut merit) = residual_norms(sys, &y, &mut f);
    let mut iterations = 0;
    while max_res > tol {
        if iterations == options.max_iterations {
            return Err(MeanFieldError::NoConvergence { iterations, residual: max_res });
        }
        iterations += 1;
        let jac = sys.jacobian(&y);
        let rhs = -DVector::from_column_slice(&f);
        let delta = match jac.clone().lu().solve(&rhs) {
            Some(d) if d.iter().all(|v| v.is_finite()) => d,
            // singular at or near degenerate roots: least-squares step
            _ => jac
                .svd(true, true)
                .solve(&rhs, 1e-14)
                .map_err(|_| MeanFieldError::NoConvergence { iterations, residual: max_res })?,
        };

        let mut damping = 1.0;
        let mut stayed_feasible = false;
        let accepted = loop {
            if damping < options.min_damping {
                break None;
            }
            let trial: Vec<f64> = y.iter().zip(delta.iter()).map(|(a, d)| a + damping * d).collect();
            match FractionState::infeasibility(strains, &trial) {
                Some(e) if e <= 1e-12 => {
                    stayed_feasible = true;
                    let mut trial = trial;
                    if e > 0.0 {
                        for v in trial.iter_mut() {
                            *v = v.max(0.0);
                        }
                        for row in trial.chunks_mut(strains) {
                            let s: f64 = row.iter().sum();
                            if s > 1.0 {
                                row.iter_mut().for_each(|v| *v /= s);
                            }
                        }
                    }
                    let (m, sq) = residual_norms(sys, &trial, &mut trial_f);
                    if sq <= (1.0 - 1e-4 * damping) * merit || m <= tol {
                        break Some((trial, m, sq));
                    }
                }
                _ => {}
            }
            damping *= 0.5;
        };
        match accepted {
            Some((trial, m, sq)) => {
                y = trial;
                std::mem::swap(&mut f, &mut trial_f);
                max_res = m;
                merit = sq;
            }
            None if !stayed_feasible => return Err(MeanFieldError::LeftFeasibleSet),
            None => return Err(MeanFieldError::NoConvergence { iterations, residual: max_res }),
        }
    }

    let spectral_abscissa = sys
        .jacobian(&y)
        .complex_eigenvalues()
        .iter()
        .map(|c| c.re)
        .fold(f64::NEG_INFINITY, f64::max);
    let stability = if spectral_abscissa.abs() <= 1e-9 {
        Stability::Marginal
    } else if spectral_abscissa < 0.0 {
        Stability::Stable
    } else {
        Stability::Unstable
    };
    Ok(FixedPoint {
        state: FractionState { islands: guess.islands, strains: guess.strains, values: y },
        residual: max_res,
        iterations,
        spectral_abscissa,
        stability,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{bipartite_single, validate_spec};

    fn bip(g: f64, mu: f64) -> MeanFieldSystem {
        let net = validate_spec(bipartite_single(g, mu, [10, 10])).unwrap();
        MeanFieldSystem::from_sizes(&net, &[10, 10]).unwrap()
    }

    #[test]
    fn zero_guess_is_a_root() {
        let fp = fixed_point(&bip(2.0, 1.0), &FractionState::zeros(2, 1), 1e-12, &NewtonOptions::default()).unwrap();
        assert_eq!(fp.iterations, 0);
        assert_eq!(fp.state.values, vec![0.0, 0.0]);
        // above threshold the disease-free point is unstable
        assert_eq!(fp.stability, Stability::Unstable);
    }

    #[test]
    fn endemic_point_found_and_stable() {
        let guess = FractionState::from_rows(&[vec![0.9], vec![0.2]]).unwrap();
        let fp = fixed_point(&bip(2.0, 1.0), &guess, 1e-13, &NewtonOptions::default()).unwrap();
        assert!((fp.state.values[0] - 0.5).abs() < 1e-12);
        assert!((fp.state.values[1] - 0.5).abs() < 1e-12);
        assert_eq!(fp.stability, Stability::Stable);
    }

    #[test]
    fn threshold_case_converges_to_origin() {
        let guess = FractionState::from_rows(&[vec![0.5], vec![0.5]]).unwrap();
        let fp = fixed_point(&bip(1.0, 1.0), &guess, 1e-10, &NewtonOptions::default()).unwrap();
        assert!(fp.state.values.iter().all(|&v| v.abs() < 1e-4), "{:?}", fp.state);
        assert!(fp.residual <= 1e-10);
    }

    #[test]
    fn iteration_cap_reported() {
        let guess = FractionState::from_rows(&[vec![0.5], vec![0.5]]).unwrap();
        let opts = NewtonOptions { max_iterations: 2, ..NewtonOptions::default() };
        assert!(matches!(
            fixed_point(&bip(1.0, 1.0), &guess, 1e-14, &opts),
            Err(MeanFieldError::NoConvergence { iterations: 2, .. })
        ));
    }

    #[test]
    fn infeasible_guess_rejected() {
        let guess = FractionState::from_rows(&[vec![1.5], vec![0.5]]).unwrap();
        assert_eq!(
            fixed_point(&bip(2.0, 1.0), &guess, 1e-10, &NewtonOptions::default()),
            Err(MeanFieldError::LeftFeasibleSet)
        );
    }
}
