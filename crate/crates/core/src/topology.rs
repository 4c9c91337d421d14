// SPDX-License-Identifier: Apache-2.0
//! Multipartite network descriptions.
//!
//! A network is described at the island level: `M` islands of `N_i` nodes
//! each, no edges inside an island, and complete connectivity between every
//! pair of adjacent islands. Strain `k` infects from island `I` toward island
//! `J` at rate `gamma[k][I][J]` per infected node and heals at island `I` at
//! rate `mu[k][I]`.
//!
//! Islands and strains are 0-indexed everywhere in this crate.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize};

/// Raw, unvalidated network description. Field names follow the JSON schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpec {
    #[serde(rename = "islands", deserialize_with = "integral")]
    pub num_islands: usize,
    #[serde(rename = "strains", deserialize_with = "integral")]
    pub num_strains: usize,
    #[serde(rename = "sizes", deserialize_with = "integral_vec")]
    pub island_sizes: Vec<u32>,
    #[serde(rename = "adjacency")]
    pub island_adjacency: Vec<Vec<bool>>,
    /// `infection_rates[strain][from][to]`.
    #[serde(rename = "gamma")]
    pub infection_rates: Vec<Vec<Vec<f64>>>,
    /// `healing_rates[strain][island]`.
    #[serde(rename = "mu")]
    pub healing_rates: Vec<Vec<f64>>,
}

/// One failed invariant, with the offending indices.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    EmptyNetwork,
    DimensionMismatch {
        field: &'static str,
        expected: usize,
        found: usize,
    },
    AsymmetricAdjacency { i: usize, j: usize },
    SelfLoopIsland { island: usize },
    RateOnNonEdge { strain: usize, from: usize, to: usize },
    NegativeRate { strain: usize, from: usize, to: usize },
    NonFiniteRate { field: &'static str },
    NonPositiveSize { island: usize },
    NonPositiveHealing { strain: usize, island: usize },
}

impl Violation {
    pub fn code(&self) -> &'static str {
        match self {
            Violation::EmptyNetwork => "EmptyNetwork",
            Violation::DimensionMismatch { .. } => "DimensionMismatch",
            Violation::AsymmetricAdjacency { .. } => "AsymmetricAdjacency",
            Violation::SelfLoopIsland { .. } => "SelfLoopIsland",
            Violation::RateOnNonEdge { .. } => "RateOnNonEdge",
            Violation::NegativeRate { .. } => "NegativeRate",
            Violation::NonFiniteRate { .. } => "NonFiniteRate",
            Violation::NonPositiveSize { .. } => "NonPositiveSize",
            Violation::NonPositiveHealing { .. } => "NonPositiveHealing",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyNetwork => write!(f, "network needs at least one island and one strain"),
            Violation::DimensionMismatch { field, expected, found } => {
                write!(f, "{field}: expected length {expected}, found {found}")
            }
            Violation::AsymmetricAdjacency { i, j } => {
                write!(f, "adjacency[{i}][{j}] != adjacency[{j}][{i}]")
            }
            Violation::SelfLoopIsland { island } => write!(f, "adjacency[{island}][{island}] is true"),
            Violation::RateOnNonEdge { strain, from, to } => {
                write!(f, "gamma[{strain}][{from}][{to}] > 0 but islands {from},{to} are not adjacent")
            }
            Violation::NegativeRate { strain, from, to } => {
                write!(f, "gamma[{strain}][{from}][{to}] is negative")
            }
            Violation::NonFiniteRate { field } => write!(f, "{field} contains a non-finite value"),
            Violation::NonPositiveSize { island } => write!(f, "sizes[{island}] must be >= 1"),
            Violation::NonPositiveHealing { strain, island } => {
                write!(f, "mu[{strain}][{island}] must be > 0")
            }
        }
    }
}

/// Every invariant violated by a spec.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} invariant violation(s)", self.violations.len())?;
        for v in &self.violations {
            write!(f, "; {}: {v}", v.code())?;
        }
        Ok(())
    }
}

impl ValidationReport {
    pub fn contains(&self, code: &str) -> bool {
        self.violations.iter().any(|v| v.code() == code)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum TopologyError {
    #[error("island index {index} out of range for {islands} islands")]
    IndexOutOfRange { index: usize, islands: usize },
    #[error(transparent)]
    Invalid(#[from] ValidationReport),
    #[error("malformed network JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("size schedule: {0}")]
    Schedule(#[from] ScheduleError),
}

/// A network whose invariants have been checked. Immutable.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    spec: NetworkSpec,
    neighbors: Vec<Vec<usize>>,
}

impl std::ops::Deref for Network {
    type Target = NetworkSpec;

    fn deref(&self) -> &NetworkSpec {
        &self.spec
    }
}

/// Checks every invariant of `spec`, returning it wrapped as a [`Network`] or
/// the full list of violations.
pub fn validate_spec(spec: NetworkSpec) -> Result<Network, ValidationReport> {
    let mut violations = Vec::new();
    let m = spec.num_islands;
    let k = spec.num_strains;
    if m == 0 || k == 0 {
        violations.push(Violation::EmptyNetwork);
    }

    let mut dim = |field, expected, found| {
        if expected != found {
            violations.push(Violation::DimensionMismatch { field, expected, found });
            false
        } else {
            true
        }
    };
    let mut shapes_ok = dim("sizes", m, spec.island_sizes.len());
    shapes_ok &= dim("adjacency", m, spec.island_adjacency.len());
    for row in &spec.island_adjacency {
        shapes_ok &= dim("adjacency row", m, row.len());
    }
    shapes_ok &= dim("gamma", k, spec.infection_rates.len());
    for per_strain in &spec.infection_rates {
        shapes_ok &= dim("gamma[strain]", m, per_strain.len());
        for row in per_strain {
            shapes_ok &= dim("gamma[strain][from]", m, row.len());
        }
    }
    shapes_ok &= dim("mu", k, spec.healing_rates.len());
    for row in &spec.healing_rates {
        shapes_ok &= dim("mu[strain]", m, row.len());
    }
    if !shapes_ok {
        return Err(ValidationReport { violations });
    }

    let adj = &spec.island_adjacency;
    for i in 0..m {
        if adj[i][i] {
            violations.push(Violation::SelfLoopIsland { island: i });
        }
        for j in (i + 1)..m {
            if adj[i][j] != adj[j][i] {
                violations.push(Violation::AsymmetricAdjacency { i, j });
            }
        }
    }
    for (i, &n) in spec.island_sizes.iter().enumerate() {
        if n == 0 {
            violations.push(Violation::NonPositiveSize { island: i });
        }
    }
    let mut gamma_finite = true;
    for (s, per_strain) in spec.infection_rates.iter().enumerate() {
        for (from, row) in per_strain.iter().enumerate() {
            for (to, &rate) in row.iter().enumerate() {
                if !rate.is_finite() {
                    gamma_finite = false;
                } else if rate < 0.0 {
                    violations.push(Violation::NegativeRate { strain: s, from, to });
                } else if rate > 0.0 && !adj[from][to] {
                    violations.push(Violation::RateOnNonEdge { strain: s, from, to });
                }
            }
        }
    }
    if !gamma_finite {
        violations.push(Violation::NonFiniteRate { field: "gamma" });
    }
    let mut mu_finite = true;
    for (s, row) in spec.healing_rates.iter().enumerate() {
        for (i, &rate) in row.iter().enumerate() {
            if !rate.is_finite() {
                mu_finite = false;
            } else if rate <= 0.0 {
                violations.push(Violation::NonPositiveHealing { strain: s, island: i });
            }
        }
    }
    if !mu_finite {
        violations.push(Violation::NonFiniteRate { field: "mu" });
    }

    if !violations.is_empty() {
        return Err(ValidationReport { violations });
    }
    let neighbors = (0..m)
        .map(|i| (0..m).filter(|&j| adj[i][j]).collect())
        .collect();
    Ok(Network { spec, neighbors })
}

impl Network {
    pub fn num_islands(&self) -> usize {
        self.spec.num_islands
    }

    pub fn num_strains(&self) -> usize {
        self.spec.num_strains
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn into_spec(self) -> NetworkSpec {
        self.spec
    }

    /// Islands adjacent to `island`, ascending.
    pub fn neighbors(&self, island: usize) -> &[usize] {
        &self.neighbors[island]
    }

    /// Rate at which one `strain`-infected node of `from` attempts infection
    /// toward `to`.
    #[inline]
    pub fn gamma(&self, strain: usize, from: usize, to: usize) -> f64 {
        self.spec.infection_rates[strain][from][to]
    }

    #[inline]
    pub fn mu(&self, strain: usize, island: usize) -> f64 {
        self.spec.healing_rates[strain][island]
    }

    /// Largest single-node event rate across the network.
    pub fn max_rate(&self) -> f64 {
        let g = self
            .spec
            .infection_rates
            .iter()
            .flatten()
            .flatten()
            .copied()
            .fold(0.0, f64::max);
        let h = self.spec.healing_rates.iter().flatten().copied().fold(0.0, f64::max);
        g.max(h)
    }

    /// Checks that an island-size vector fits this network.
    pub fn check_sizes(&self, sizes: &[u32]) -> Result<(), ScheduleError> {
        if sizes.len() != self.num_islands() {
            return Err(ScheduleError::WrongLength {
                entry: 0,
                expected: self.num_islands(),
                found: sizes.len(),
            });
        }
        if let Some(island) = sizes.iter().position(|&n| n == 0) {
            return Err(ScheduleError::NonPositive { entry: 0, island });
        }
        Ok(())
    }

    pub fn from_json_str(text: &str) -> Result<Network, TopologyError> {
        let spec: NetworkSpec = serde_json::from_str(text)?;
        Ok(validate_spec(spec)?)
    }

    pub fn from_json_value(value: serde_json::Value) -> Result<Network, TopologyError> {
        let spec: NetworkSpec = serde_json::from_value(value)?;
        Ok(validate_spec(spec)?)
    }
}

/// The superneighborhood of `island`: every island adjacent to it. Its size
/// is the superdegree.
pub fn superneighbors(network: &Network, island: usize) -> Result<BTreeSet<usize>, TopologyError> {
    if island >= network.num_islands() {
        return Err(TopologyError::IndexOutOfRange {
            index: island,
            islands: network.num_islands(),
        });
    }
    Ok(network.neighbors(island).iter().copied().collect())
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScheduleError {
    #[error("schedule is empty")]
    Empty,
    #[error("entry {entry}: expected {expected} island sizes, found {found}")]
    WrongLength { entry: usize, expected: usize, found: usize },
    #[error("entry {entry}: island {island} has size 0")]
    NonPositive { entry: usize, island: usize },
    #[error("alpha must be a {expected}x{expected} matrix")]
    AlphaShape { expected: usize },
    #[error("N_{from}/N_{to} = {observed} but declared alpha = {declared}")]
    RatioMismatch {
        from: usize,
        to: usize,
        observed: f64,
        declared: f64,
    },
}

/// A growing sequence of island-size vectors over one network shape.
///
/// `alpha[j][i]` is the declared limit of `N_j / N_i` (source over sink), the
/// factor that multiplies `gamma[k][j][i]` in the limiting drift.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeSchedule {
    pub entries: Vec<Vec<u32>>,
    #[serde(default)]
    pub alpha: Option<Vec<Vec<f64>>>,
}

impl SizeSchedule {
    pub fn new(entries: Vec<Vec<u32>>) -> Self {
        SizeSchedule { entries, alpha: None }
    }

    pub fn with_alpha(mut self, alpha: Vec<Vec<f64>>) -> Self {
        self.alpha = Some(alpha);
        self
    }

    /// Checks entry shapes and, when `alpha` is declared, that the last
    /// entry's ratios on adjacent pairs are within `rel_tol` of it.
    pub fn validate(&self, network: &Network, rel_tol: f64) -> Result<(), ScheduleError> {
        let m = network.num_islands();
        if self.entries.is_empty() {
            return Err(ScheduleError::Empty);
        }
        for (e, sizes) in self.entries.iter().enumerate() {
            if sizes.len() != m {
                return Err(ScheduleError::WrongLength { entry: e, expected: m, found: sizes.len() });
            }
            if let Some(island) = sizes.iter().position(|&n| n == 0) {
                return Err(ScheduleError::NonPositive { entry: e, island });
            }
        }
        let Some(alpha) = &self.alpha else {
            return Ok(());
        };
        if alpha.len() != m || alpha.iter().any(|r| r.len() != m) {
            return Err(ScheduleError::AlphaShape { expected: m });
        }
        let last = self.entries.last().expect("non-empty");
        for sink in 0..m {
            for &source in network.neighbors(sink) {
                let observed = f64::from(last[source]) / f64::from(last[sink]);
                let declared = alpha[source][sink];
                if (observed - declared).abs() > rel_tol * declared.abs().max(f64::MIN_POSITIVE) {
                    return Err(ScheduleError::RatioMismatch { from: source, to: sink, observed, declared });
                }
            }
        }
        Ok(())
    }
}

fn as_integral<E: serde::de::Error>(x: f64) -> Result<u64, E> {
    if x.is_finite() && x >= 0.0 && x.fract() == 0.0 && x <= 9.007_199_254_740_992e15 {
        Ok(x as u64)
    } else {
        Err(E::custom(format!("expected a non-negative integer, found {x}")))
    }
}

fn integral<'de, D: Deserializer<'de>>(d: D) -> Result<usize, D::Error> {
    let x = f64::deserialize(d)?;
    as_integral(x).map(|v| v as usize)
}

fn integral_vec<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u32>, D::Error> {
    let xs = Vec::<f64>::deserialize(d)?;
    xs.into_iter()
        .map(|x| {
            let v = as_integral(x)?;
            u32::try_from(v).map_err(|_| serde::de::Error::custom(format!("size {v} too large")))
        })
        .collect()
}

/// Two islands joined by one edge, one strain with symmetric rates.
pub fn bipartite_single(gamma: f64, mu: f64, sizes: [u32; 2]) -> NetworkSpec {
    NetworkSpec {
        num_islands: 2,
        num_strains: 1,
        island_sizes: sizes.to_vec(),
        island_adjacency: vec![vec![false, true], vec![true, false]],
        infection_rates: vec![vec![vec![0.0, gamma], vec![gamma, 0.0]]],
        healing_rates: vec![vec![mu, mu]],
    }
}

/// Two islands joined by one edge, one symmetric infection rate per strain
/// and a common healing rate.
pub fn bipartite_multi(gammas: &[f64], mu: f64, sizes: [u32; 2]) -> NetworkSpec {
    NetworkSpec {
        num_islands: 2,
        num_strains: gammas.len(),
        island_sizes: sizes.to_vec(),
        island_adjacency: vec![vec![false, true], vec![true, false]],
        infection_rates: gammas.iter().map(|&g| vec![vec![0.0, g], vec![g, 0.0]]).collect(),
        healing_rates: gammas.iter().map(|_| vec![mu, mu]).collect(),
    }
}
