// SPDX-License-Identifier: Apache-2.0
use nalgebra::DMatrix;

use super::MeanFieldError;
use crate::topology::Network;

/// Normalized rates of the limiting vector field.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanFieldSystem {
    islands: usize,
    strains: usize,
    /// mu[i * K + k]
    mu: Vec<f64>,
    /// sources[i * K + k] = (j, γ̄^k_{ji}) over adjacent j with γ̄ > 0
    sources: Vec<Vec<(usize, f64)>>,
}

impl MeanFieldSystem {
    /// `alpha[j][i]` is the ratio `N_j / N_i` (source over sink) that scales
    /// `gamma[k][j][i]`.
    pub fn from_alpha(network: &Network, alpha: &[Vec<f64>]) -> Result<Self, MeanFieldError> {
        let m = network.num_islands();
        let k = network.num_strains();
        if alpha.len() != m || alpha.iter().any(|r| r.len() != m) {
            return Err(MeanFieldError::InvalidAlpha { expected: m });
        }
        let mut mu = Vec::with_capacity(m * k);
        let mut sources = Vec::with_capacity(m * k);
        for i in 0..m {
            for s in 0..k {
                mu.push(network.mu(s, i));
                let mut row = Vec::new();
                for &j in network.neighbors(i) {
                    let a = alpha[j][i];
                    if !(a.is_finite() && a >= 0.0) {
                        return Err(MeanFieldError::InvalidAlpha { expected: m });
                    }
                    let g = a * network.gamma(s, j, i);
                    if g > 0.0 {
                        row.push((j, g));
                    }
                }
                sources.push(row);
            }
        }
        Ok(MeanFieldSystem { islands: m, strains: k, mu, sources })
    }

    /// Uses the finite ratios `N_j / N_i` of `sizes`. This is the drift of the
    /// normalized jump process at that size.
    pub fn from_sizes(network: &Network, sizes: &[u32]) -> Result<Self, MeanFieldError> {
        let m = network.num_islands();
        if sizes.len() != m || sizes.contains(&0) {
            return Err(MeanFieldError::DimensionMismatch { expected: m, found: sizes.len() });
        }
        let alpha: Vec<Vec<f64>> = (0..m)
            .map(|j| (0..m).map(|i| f64::from(sizes[j]) / f64::from(sizes[i])).collect())
            .collect();
        Self::from_alpha(network, &alpha)
    }

    pub fn islands(&self) -> usize {
        self.islands
    }

    pub fn strains(&self) -> usize {
        self.strains
    }

    pub fn width(&self) -> usize {
        self.islands * self.strains
    }

    /// `γ̄^k_{ji}`, zero off the adjacency.
    pub fn gamma_bar(&self, strain: usize, from: usize, to: usize) -> f64 {
        self.sources[to * self.strains + strain]
            .iter()
            .find(|&&(j, _)| j == from)
            .map_or(0.0, |&(_, g)| g)
    }

    pub fn mu(&self, strain: usize, island: usize) -> f64 {
        self.mu[island * self.strains + strain]
    }

    pub fn max_rate(&self) -> f64 {
        let g = self.sources.iter().flatten().map(|&(_, g)| g).fold(0.0, f64::max);
        self.mu.iter().copied().fold(g, f64::max)
    }

    /// `F(y)` into `out`; both island-major of length `width()`.
    #[inline]
    pub fn field_into(&self, y: &[f64], out: &mut [f64]) {
        let k = self.strains;
        for i in 0..self.islands {
            let healthy = 1.0 - y[i * k..(i + 1) * k].iter().sum::<f64>();
            for s in 0..k {
                let class = i * k + s;
                let pressure: f64 = self.sources[class].iter().map(|&(j, g)| g * y[j * k + s]).sum();
                out[class] = pressure * healthy - self.mu[class] * y[class];
            }
        }
    }

    /// Analytic Jacobian `∂F_ik / ∂y_jl`, rows and columns island-major.
    pub fn jacobian(&self, y: &[f64]) -> DMatrix<f64> {
        let k = self.strains;
        let w = self.width();
        let mut jac = DMatrix::zeros(w, w);
        for i in 0..self.islands {
            let healthy = 1.0 - y[i * k..(i + 1) * k].iter().sum::<f64>();
            for s in 0..k {
                let class = i * k + s;
                let mut pressure = 0.0;
                for &(j, g) in &self.sources[class] {
                    pressure += g * y[j * k + s];
                    jac[(class, j * k + s)] += g * healthy;
                }
                // the healthy fraction depends on every strain at island i
                for l in 0..k {
                    jac[(class, i * k + l)] -= pressure;
                }
                jac[(class, class)] -= self.mu[class];
            }
        }
        jac
    }
}

/// Fractions `y[i][k]`, island-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionState {
    pub islands: usize,
    pub strains: usize,
    pub values: Vec<f64>,
}

impl FractionState {
    pub fn zeros(islands: usize, strains: usize) -> Self {
        FractionState { islands, strains, values: vec![0.0; islands * strains] }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, MeanFieldError> {
        let strains = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != strains) {
            return Err(MeanFieldError::InvalidState("ragged fraction matrix".into()));
        }
        Ok(FractionState {
            islands: rows.len(),
            strains,
            values: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn get(&self, island: usize, strain: usize) -> f64 {
        self.values[island * self.strains + strain]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.values.chunks(self.strains.max(1)).map(<[f64]>::to_vec).collect()
    }

    /// Largest amount by which `values` leaves `{y ≥ 0, Σ_k y_ik ≤ 1}`;
    /// `None` on a non-finite entry.
    pub fn infeasibility(strains: usize, values: &[f64]) -> Option<f64> {
        let mut excess: f64 = 0.0;
        for row in values.chunks(strains) {
            let mut sum = 0.0;
            for &v in row {
                if !v.is_finite() {
                    return None;
                }
                excess = excess.max(-v);
                sum += v;
            }
            excess = excess.max(sum - 1.0);
        }
        Some(excess)
    }

    pub fn validate(&self, tol: f64) -> Result<(), MeanFieldError> {
        match Self::infeasibility(self.strains, &self.values) {
            None => Err(MeanFieldError::InvalidState("non-finite entry".into())),
            Some(e) if e > tol => Err(MeanFieldError::InvalidState(format!(
                "outside the feasible set by {e:e}"
            ))),
            Some(_) => Ok(()),
        }
    }
}

/// `F(y)` as a matrix of the same shape as `y`.
pub fn vector_field(sys: &MeanFieldSystem, y: &FractionState) -> Result<FractionState, MeanFieldError> {
    if y.islands != sys.islands() || y.strains != sys.strains() || y.values.len() != sys.width() {
        return Err(MeanFieldError::DimensionMismatch { expected: sys.width(), found: y.values.len() });
    }
    y.validate(0.0)?;
    let mut out = FractionState::zeros(y.islands, y.strains);
    sys.field_into(&y.values, &mut out.values);
    Ok(out)
}
