// SPDX-License-Identifier: Apache-2.0
use super::AnalysisError;
use crate::path::SampledPath;

/// `max` over grid points and coordinates of `|a − b|`.
pub fn sup_distance(a: &SampledPath, b: &SampledPath) -> Result<f64, AnalysisError> {
    if a.width != b.width || a.times != b.times {
        return Err(AnalysisError::GridMismatch);
    }
    Ok(a.values.iter().zip(&b.values).fold(0.0, |m, (x, y)| m.max((x - y).abs())))
}
