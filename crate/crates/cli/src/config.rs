// SPDX-License-Identifier: Apache-2.0
//! Run configuration: the network schema plus one optional block per
//! subcommand and an optional top-level `seed`. A manifest written by a
//! previous run is accepted in place of a config file.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sisnet_core::analysis::{realize_initial, BoundForm};
use sisnet_core::ctmc::{DEFAULT_EVENT_CAP, DEFAULT_STATE_CAP, DEFAULT_TAIL_TOLERANCE};
use sisnet_core::meanfield::DEFAULT_STEP;
use sisnet_core::{FractionState, MacroState, Network};

use crate::error::CliError;

pub const BLOCK_KEYS: [&str; 6] = ["simulate", "micro", "meanfield", "converge", "exact", "martingale"];
pub const MANIFEST_TOOL: &str = "sisnet";

fn default_one() -> usize {
    1
}
fn default_event_cap() -> u64 {
    DEFAULT_EVENT_CAP
}
fn default_step() -> f64 {
    DEFAULT_STEP
}
fn default_stride() -> f64 {
    0.01
}
fn default_ratio_tol() -> f64 {
    1e-2
}
fn default_exact_replicas() -> usize {
    100_000
}
fn default_state_cap() -> usize {
    DEFAULT_STATE_CAP
}
fn default_tail() -> f64 {
    DEFAULT_TAIL_TOLERANCE
}
fn default_tv() -> f64 {
    0.01
}
fn default_mart_replicas() -> usize {
    500
}
fn default_band() -> Option<[f64; 2]> {
    Some([-1.3, -0.7])
}

/// Initial condition as integer counts or as fractions rounded per island.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Initial {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_counts: Option<Vec<Vec<u32>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y0: Option<Vec<Vec<f64>>>,
}

impl Initial {
    pub fn resolve(&self, network: &Network, sizes: &[u32]) -> Result<MacroState, CliError> {
        let state = match (&self.initial_counts, &self.y0) {
            (Some(counts), None) => {
                MacroState::from_rows(counts).map_err(|e| CliError::InvalidState(e.to_string()))?
            }
            (None, Some(y0)) => realize_initial(&fractions(y0, network)?, sizes).0,
            _ => {
                return Err(CliError::InvalidParameter(
                    "give exactly one of \"initial_counts\" or \"y0\"".into(),
                ))
            }
        };
        if state.islands() != network.num_islands() || state.strains() != network.num_strains() {
            return Err(CliError::InvalidState("initial state shape does not match the network".into()));
        }
        state.validate(sizes).map_err(|e| CliError::InvalidState(e.to_string()))?;
        Ok(state)
    }
}

pub fn fractions(rows: &[Vec<f64>], network: &Network) -> Result<FractionState, CliError> {
    let y = FractionState::from_rows(rows).map_err(|e| CliError::InvalidState(e.to_string()))?;
    if y.islands != network.num_islands() || y.strains != network.num_strains() {
        return Err(CliError::InvalidState("y0 shape does not match the network".into()));
    }
    y.validate(0.0).map_err(|e| CliError::InvalidState(e.to_string()))?;
    Ok(y)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sizes: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_counts: Option<Vec<Vec<u32>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y0: Option<Vec<Vec<f64>>>,
    pub horizon: f64,
    #[serde(default = "default_one")]
    pub replicas: usize,
    #[serde(default = "default_event_cap")]
    pub event_cap: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeanfieldBlock {
    /// Island sizes whose ratios give `alpha` when `alpha` is absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sizes: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<Vec<f64>>>,
    pub y0: Vec<Vec<f64>>,
    pub horizon: f64,
    #[serde(default = "default_step")]
    pub step: f64,
    #[serde(default = "default_stride")]
    pub stride: f64,
    /// Starting guess for a Newton search for an equilibrium.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equilibrium_guess: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergeBlock {
    pub schedule: Vec<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<Vec<f64>>>,
    #[serde(default = "default_ratio_tol")]
    pub ratio_tolerance: f64,
    pub y0: Vec<Vec<f64>>,
    pub horizon: f64,
    #[serde(default = "default_stride")]
    pub stride: f64,
    #[serde(default = "default_step")]
    pub step: f64,
    pub replicas: usize,
    #[serde(default = "default_event_cap")]
    pub event_cap: u64,
    #[serde(default)]
    pub checkpoints: Vec<f64>,
    #[serde(default)]
    pub bound: BoundForm,
    /// Require each entry's median error to be below the previous one.
    #[serde(default)]
    pub require_decreasing: bool,
    /// Require last median ≤ this fraction of the first median.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_final_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_band: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SimulatorKind {
    #[default]
    Macro,
    Micro,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExactBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sizes: Option<Vec<u32>>,
    pub initial_counts: Vec<Vec<u32>>,
    pub times: Vec<f64>,
    #[serde(default = "default_exact_replicas")]
    pub replicas: usize,
    #[serde(default = "default_state_cap")]
    pub state_cap: usize,
    #[serde(default = "default_tail")]
    pub tail_tolerance: f64,
    #[serde(default = "default_tv")]
    pub tv_threshold: f64,
    #[serde(default)]
    pub simulator: SimulatorKind,
    #[serde(default)]
    pub export_generator: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MartingaleBlock {
    pub schedule: Vec<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_counts: Option<Vec<Vec<u32>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y0: Option<Vec<Vec<f64>>>,
    pub t: f64,
    #[serde(default = "default_mart_replicas")]
    pub replicas: usize,
    #[serde(default)]
    pub bound: BoundForm,
    #[serde(default = "default_band")]
    pub exponent_band: Option<[f64; 2]>,
    #[serde(default = "default_event_cap")]
    pub event_cap: u64,
}

impl SimulateBlock {
    pub fn initial(&self) -> Initial {
        Initial { initial_counts: self.initial_counts.clone(), y0: self.y0.clone() }
    }
}

impl MartingaleBlock {
    pub fn initial(&self) -> Initial {
        Initial { initial_counts: self.initial_counts.clone(), y0: self.y0.clone() }
    }
}

/// A parsed config: the validated network, the raw JSON it came from, and
/// the seed recorded in it (if any).
#[derive(Debug, Clone)]
pub struct RunFile {
    pub network: Network,
    pub raw: Map<String, Value>,
    pub seed: Option<u64>,
}

impl RunFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(CliError::ConfigNotFound(path.to_path_buf()))
            }
            Err(e) => return Err(e.into()),
        };
        let value: Value = serde_json::from_str(&text).map_err(|e| CliError::ConfigParse(e.to_string()))?;
        Self::from_value(value)
    }

    pub fn from_value(value: Value) -> Result<Self, CliError> {
        let Value::Object(mut obj) = value else {
            return Err(CliError::ConfigParse("top level must be a JSON object".into()));
        };
        if obj.get("tool").and_then(Value::as_str) == Some(MANIFEST_TOOL) {
            match obj.remove("config") {
                Some(Value::Object(cfg)) => obj = cfg,
                _ => return Err(CliError::ConfigParse("manifest has no \"config\" object".into())),
            }
        }
        let mut network_part = obj.clone();
        for key in BLOCK_KEYS {
            network_part.remove(key);
        }
        let seed = match network_part.remove("seed") {
            None => None,
            Some(v) => Some(
                v.as_u64()
                    .ok_or_else(|| CliError::ConfigParse("\"seed\" must be an unsigned 64-bit integer".into()))?,
            ),
        };
        let network = Network::from_json_value(Value::Object(network_part))?;
        Ok(RunFile { network, raw: obj, seed })
    }

    pub fn block<T: for<'de> Deserialize<'de>>(&self, key: &'static str) -> Result<T, CliError> {
        let v = self.raw.get(key).ok_or(CliError::MissingBlock(key))?;
        serde_json::from_value(v.clone()).map_err(|e| CliError::ConfigParse(format!("\"{key}\" block: {e}")))
    }

    /// The config with `seed` set and `key` replaced by its fully resolved
    /// form, as recorded in manifests.
    pub fn resolved<T: Serialize>(&self, key: &str, block: &T, seed: u64) -> Value {
        let mut obj = self.raw.clone();
        obj.insert("seed".into(), Value::from(seed));
        if let Ok(v) = serde_json::to_value(block) {
            obj.insert(key.into(), v);
        }
        Value::Object(obj)
    }

    pub fn sizes_or_default(&self, sizes: &Option<Vec<u32>>) -> Result<Vec<u32>, CliError> {
        let sizes = sizes.clone().unwrap_or_else(|| self.network.island_sizes.clone());
        self.network.check_sizes(&sizes)?;
        Ok(sizes)
    }
}
