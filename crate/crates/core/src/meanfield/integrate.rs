// SPDX-License-Identifier: Apache-2.0
//! Classical fixed-step RK4 with feasibility checks on every step.

use super::{FractionState, MeanFieldError, MeanFieldSystem};
use crate::path::{uniform_grid, SampledPath};

pub const DEFAULT_STEP: f64 = 1e-3;
/// Violations up to this size are rounding and get projected away; larger
/// ones abort the run.
pub const PROJECTION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub step: f64,
    /// Output spacing; `None` records every step.
    pub stride: Option<f64>,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig { step: DEFAULT_STEP, stride: None }
    }
}

impl IntegratorConfig {
    pub fn new(step: f64) -> Self {
        IntegratorConfig { step, stride: None }
    }

    pub fn with_stride(mut self, stride: f64) -> Self {
        self.stride = Some(stride);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseOutput {
    pub path: SampledPath,
    /// Steps whose result needed a sub-tolerance projection.
    pub projections: u64,
    pub steps: u64,
}

impl DenseOutput {
    pub fn final_state(&self, islands: usize, strains: usize) -> FractionState {
        FractionState {
            islands,
            strains,
            values: self.path.last_row().map(<[f64]>::to_vec).unwrap_or_default(),
        }
    }
}

struct Rk4 {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4 {
    fn new(w: usize) -> Self {
        Rk4 { k1: vec![0.0; w], k2: vec![0.0; w], k3: vec![0.0; w], k4: vec![0.0; w], tmp: vec![0.0; w] }
    }

    fn step(&mut self, sys: &MeanFieldSystem, y: &mut [f64], h: f64) {
        sys.field_into(y, &mut self.k1);
        for ((t, &y), &k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k1) {
            *t = y + 0.5 * h * k;
        }
        sys.field_into(&self.tmp, &mut self.k2);
        for ((t, &y), &k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k2) {
            *t = y + 0.5 * h * k;
        }
        sys.field_into(&self.tmp, &mut self.k3);
        for ((t, &y), &k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k3) {
            *t = y + h * k;
        }
        sys.field_into(&self.tmp, &mut self.k4);
        for (n, y) in y.iter_mut().enumerate() {
            *y += h / 6.0 * (self.k1[n] + 2.0 * self.k2[n] + 2.0 * self.k3[n] + self.k4[n]);
        }
    }
}

fn project(strains: usize, y: &mut [f64]) {
    for row in y.chunks_mut(strains) {
        for v in row.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        let sum: f64 = row.iter().sum();
        if sum > 1.0 {
            for v in row.iter_mut() {
                *v /= sum;
            }
        }
    }
}

/// Integrates `dy/dt = F(y)` from `y0` over `[0, horizon]`.
///
/// Steps have length `step` except the last one before each output time,
/// which is shortened to land on it exactly. With `stride` a whole multiple
/// of `step` this is plain fixed-step RK4.
pub fn integrate(
    sys: &MeanFieldSystem,
    y0: &FractionState,
    horizon: f64,
    config: &IntegratorConfig,
) -> Result<DenseOutput, MeanFieldError> {
    let h = config.step;
    if !(h > 0.0 && h.is_finite()) {
        return Err(MeanFieldError::InvalidConfig(format!("step {h}")));
    }
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(MeanFieldError::InvalidConfig(format!("horizon {horizon}")));
    }
    if let Some(s) = config.stride {
        if !(s > 0.0 && s.is_finite()) {
            return Err(MeanFieldError::InvalidConfig(format!("stride {s}")));
        }
    }
    let w = sys.width();
    if y0.islands != sys.islands() || y0.strains != sys.strains() || y0.values.len() != w {
        return Err(MeanFieldError::DimensionMismatch { expected: w, found: y0.values.len() });
    }
    y0.validate(0.0)?;

    let grid = uniform_grid(horizon, config.stride.unwrap_or(h));
    let strains = sys.strains();
    let mut values = Vec::with_capacity(grid.len() * w);
    let mut y = y0.values.clone();
    values.extend_from_slice(&y);
    let mut rk = Rk4::new(w);
    let (mut projections, mut steps) = (0u64, 0u64);
    for pair in grid.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let n = (((b - a) / h) - 1e-6).ceil().max(1.0) as u64;
        for s in 0..n {
            let start = a + s as f64 * h;
            let dt = if s + 1 == n { b - start } else { h };
            rk.step(sys, &mut y, dt);
            steps += 1;
            let time = start + dt;
            match FractionState::infeasibility(strains, &y) {
                None => return Err(MeanFieldError::NonFiniteState { time }),
                Some(e) if e > PROJECTION_TOLERANCE => {
                    return Err(MeanFieldError::StepTooLarge { time, excess: e })
                }
                Some(e) if e > 0.0 => {
                    project(strains, &mut y);
                    projections += 1;
                }
                Some(_) => {}
            }
        }
        values.extend_from_slice(&y);
    }
    Ok(DenseOutput { path: SampledPath::new(grid, w, values), projections, steps })
}
