// SPDX-License-Identifier: Apache-2.0
//! Transient distributions by uniformization:
//! `π(t) = Σ_n Poisson(Λt; n) π₀ Pⁿ` with `P = I + Q/Λ`.

use super::{CtmcError, GeneratorMatrix};

pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-12;
const HEADROOM: f64 = 1.05;

/// Distribution at time `t` started from `initial`. Terms are added until the
/// remaining Poisson mass is at most `tail_tolerance`.
pub fn transient_distribution(
    gen: &GeneratorMatrix,
    initial: &[f64],
    t: f64,
    tail_tolerance: f64,
) -> Result<Vec<f64>, CtmcError> {
    if initial.len() != gen.len() {
        return Err(CtmcError::InvalidDistribution(format!(
            "length {} for {} states",
            initial.len(),
            gen.len()
        )));
    }
    let mass: f64 = initial.iter().sum();
    if (mass - 1.0).abs() > 1e-12 || initial.iter().any(|&p| !(p >= 0.0)) {
        return Err(CtmcError::InvalidDistribution(format!("total mass {mass}")));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(CtmcError::InvalidDistribution(format!("time {t}")));
    }
    if !(tail_tolerance > 0.0 && tail_tolerance < 1.0) {
        return Err(CtmcError::InvalidDistribution(format!("tail tolerance {tail_tolerance}")));
    }
    let max_exit = gen.max_exit_rate();
    if t == 0.0 || max_exit == 0.0 {
        return Ok(initial.to_vec());
    }

    let lambda = HEADROOM * max_exit;
    let lt = lambda * t;
    let n = gen.len();
    let mut v = initial.to_vec();
    let mut next = vec![0.0; n];
    let mut out = vec![0.0; n];
    // log-space weights so large Λt does not underflow e^{-Λt}
    let mut log_w = -lt;
    let mut cumulative = 0.0;
    let mut step = 0u64;
    loop {
        let w = log_w.exp();
        if w > 0.0 {
            for (o, &x) in out.iter_mut().zip(&v) {
                *o += w * x;
            }
        }
        cumulative += w;
        // tail beyond step: Σ_{m>step} w_m ≤ w_{step+1} / (1 - Λt/(step+2)) once step+2 > Λt
        let k = (step + 1) as f64;
        let w_next = (log_w + (lt / k).ln()).exp();
        if k + 1.0 > lt {
            let tail = w_next / (1.0 - lt / (k + 1.0));
            if tail <= tail_tolerance && cumulative >= 1.0 - tail_tolerance - 1e-9 {
                break;
            }
        }
        apply_uniformized(gen, lambda, &v, &mut next);
        std::mem::swap(&mut v, &mut next);
        log_w += (lt / k).ln();
        step += 1;
    }

    let total: f64 = out.iter().sum();
    if (total - 1.0).abs() > 1e-9 || out.iter().any(|&p| p < -1e-12 || !p.is_finite()) {
        return Err(CtmcError::NonStochasticResult(format!("mass {total}")));
    }
    for p in &mut out {
        *p = p.max(0.0) / total;
    }
    Ok(out)
}

/// `out = v P` with `P = I + Q/Λ`.
fn apply_uniformized(gen: &GeneratorMatrix, lambda: f64, v: &[f64], out: &mut [f64]) {
    for (s, o) in out.iter_mut().enumerate() {
        *o = v[s] * (1.0 + gen.diagonal(s) / lambda);
    }
    for (s, &x) in v.iter().enumerate() {
        if x != 0.0 {
            for &(c, r) in gen.row(s) {
                out[c] += x * r / lambda;
            }
        }
    }
}

/// Half the L1 distance between two probability vectors.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len(), "distributions over different supports");
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ctmc::{build_generator, MacroState, DEFAULT_STATE_CAP};
    use crate::topology::{bipartite_single, validate_spec};

    fn gen33() -> GeneratorMatrix {
        let net = validate_spec(bipartite_single(2.0, 1.0, [3, 3])).unwrap();
        build_generator(&net, &[3, 3], DEFAULT_STATE_CAP).unwrap()
    }

    #[test]
    fn time_zero_is_identity() {
        let gen = gen33();
        let p0 = gen.point_mass(&MacroState::from_rows(&[vec![1], vec![1]]).unwrap()).unwrap();
        assert_eq!(transient_distribution(&gen, &p0, 0.0, 1e-12).unwrap(), p0);
    }

    #[test]
    fn absorbing_mass_stays_put() {
        let gen = gen33();
        let p0 = gen.point_mass(&MacroState::zeros(2, 1)).unwrap();
        for t in [0.5, 3.0, 40.0] {
            let p = transient_distribution(&gen, &p0, t, 1e-12).unwrap();
            assert!(total_variation(&p, &p0) < 1e-12);
        }
    }

    #[test]
    fn long_horizons_stay_stochastic() {
        let gen = gen33();
        let p0 = gen.point_mass(&MacroState::from_rows(&[vec![3], vec![3]]).unwrap()).unwrap();
        let p = transient_distribution(&gen, &p0, 200.0, 1e-12).unwrap();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        assert!(p.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn rejects_bad_initial() {
        let gen = gen33();
        let p = vec![0.5; gen.len()];
        assert!(matches!(
            transient_distribution(&gen, &p, 1.0, 1e-12),
            Err(CtmcError::InvalidDistribution(_))
        ));
    }
}
