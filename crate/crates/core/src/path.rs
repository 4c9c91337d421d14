// SPDX-License-Identifier: Apache-2.0
//! Fixed-grid samples of matrix-valued paths.

/// Values of an `islands × strains` path on a time grid, one row of
/// `width` entries per grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPath {
    pub times: Vec<f64>,
    pub width: usize,
    pub values: Vec<f64>,
}

impl SampledPath {
    pub fn new(times: Vec<f64>, width: usize, values: Vec<f64>) -> Self {
        assert_eq!(times.len() * width, values.len(), "values must hold one row per time");
        SampledPath { times, width, values }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn row(&self, n: usize) -> &[f64] {
        &self.values[n * self.width..(n + 1) * self.width]
    }

    pub fn rows(&self) -> impl Iterator<Item = (f64, &[f64])> {
        self.times.iter().copied().zip(self.values.chunks(self.width.max(1)))
    }

    pub fn last_row(&self) -> Option<&[f64]> {
        (!self.is_empty()).then(|| self.row(self.len() - 1))
    }
}

/// `0, stride, 2 stride, …` up to and including `horizon`. The last point is
/// `horizon` exactly even when it is not a whole multiple of `stride`.
pub fn uniform_grid(horizon: f64, stride: f64) -> Vec<f64> {
    assert!(stride > 0.0 && horizon >= 0.0, "grid needs stride > 0 and horizon >= 0");
    let steps = (horizon / stride).round();
    let n = steps as usize;
    let mut grid: Vec<f64> = (0..=n).map(|i| i as f64 * stride).collect();
    if (steps * stride - horizon).abs() <= 1e-9 * stride || grid[n] > horizon {
        grid[n] = horizon;
    } else {
        grid.push(horizon);
    }
    grid
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_lands_on_horizon() {
        let g = uniform_grid(10.0, 0.01);
        assert_eq!(g.len(), 1001);
        assert_eq!(g[0], 0.0);
        assert_eq!(*g.last().unwrap(), 10.0);
        let g = uniform_grid(1.05, 0.5);
        assert_eq!(g, vec![0.0, 0.5, 1.0, 1.05]);
        assert_eq!(uniform_grid(0.0, 0.1), vec![0.0]);
    }
}
