//! JSON case files. The formal schema is `schemas/case.schema.json`.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ContingencyLimit, Variant};
use crate::network::{all_single_line_contingencies, Bus, Contingency, GeneratorSpec, Line, Network, ScenarioSet};

pub const CASE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    #[default]
    Mw,
    /// Power quantities are per-unit on `base_mva`; costs stay in $/MWh.
    Pu,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BusRecord {
    pub id: usize,
    pub demand: f64,
    pub voll: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineRecord {
    pub id: usize,
    pub from: usize,
    pub to: usize,
    pub reactance: f64,
    pub capacity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorRecord {
    pub bus: usize,
    pub cost: f64,
    #[serde(default)]
    pub gmin: f64,
    pub gmax: f64,
    #[serde(default)]
    pub reserve_cost_up: f64,
    #[serde(default)]
    pub reserve_cost_down: f64,
    #[serde(default)]
    pub reserve_cap_up: f64,
    #[serde(default)]
    pub reserve_cap_down: f64,
    /// Defaults to the bus demand.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub load_shed_cap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Probabilities {
    Uniform(f64),
    PerContingency(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioMode {
    AllSingleLines,
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContingencyRecord {
    pub removed_lines: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub mode: ScenarioMode,
    pub probabilities: Probabilities,
    pub da_multiplier: f64,
    pub se_multiplier: f64,
    /// Required when `mode` is `explicit`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub contingencies: Vec<ContingencyRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[default]
    Monolithic,
    Benders,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Monolithic => "monolithic",
            Method::Benders => "benders",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Pricing {
    Nlmp,
    Slmp,
    #[default]
    Both,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Relative agreement required between solution methods.
    #[serde(default = "default_objective_tol")]
    pub objective: f64,
    /// Absolute bound on KKT residuals.
    #[serde(default = "default_kkt_tol")]
    pub kkt: f64,
}

fn default_objective_tol() -> f64 {
    1e-4
}

fn default_kkt_tol() -> f64 {
    1e-6
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            objective: default_objective_tol(),
            kkt: default_kkt_tol(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    #[serde(default = "default_variant")]
    pub variant: Variant,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default)]
    pub method: Method,
    #[serde(default)]
    pub pricing: Pricing,
    #[serde(default)]
    pub psced_limit: ContingencyLimit,
    #[serde(default)]
    pub tolerances: Tolerances,
}

fn default_variant() -> Variant {
    Variant::Rsced
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            variant: default_variant(),
            alpha: 0.0,
            method: Method::default(),
            pricing: Pricing::default(),
            psced_limit: ContingencyLimit::default(),
            tolerances: Tolerances::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseFile {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default = "default_base")]
    pub base_mva: f64,
    #[serde(default)]
    pub units: Units,
    #[serde(default)]
    pub slack_bus: usize,
    pub buses: Vec<BusRecord>,
    pub lines: Vec<LineRecord>,
    pub generators: Vec<GeneratorRecord>,
    pub scenarios: ScenarioConfig,
    #[serde(default)]
    pub solve: SolveConfig,
}

fn default_base() -> f64 {
    100.0
}

/// A validated case with its network and scenario set built.
#[derive(Debug, Clone)]
pub struct Case {
    pub file: CaseFile,
    pub network: Network,
    pub scenarios: ScenarioSet,
}

fn invalid(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Validation {
        path: path.into(),
        message: message.into(),
    }
}

fn finite_nonneg(path: String, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(invalid(path, format!("must be a finite nonnegative number, got {v}")))
    }
}

impl CaseFile {
    fn scale(&self) -> f64 {
        match self.units {
            Units::Mw => 1.0,
            Units::Pu => self.base_mva,
        }
    }

    /// Field-addressed checks that precede network construction.
    fn check_fields(&self) -> Result<()> {
        if self.schema_version != CASE_SCHEMA_VERSION {
            return Err(Error::UnsupportedSchemaVersion(self.schema_version));
        }
        if !(self.base_mva.is_finite() && self.base_mva > 0.0) {
            return Err(invalid("base_mva", "must be positive"));
        }
        for (i, b) in self.buses.iter().enumerate() {
            if b.id != i {
                return Err(invalid(format!("buses[{i}].id"), format!("expected {i}, got {}", b.id)));
            }
            finite_nonneg(format!("buses[{i}].demand"), b.demand)?;
            finite_nonneg(format!("buses[{i}].voll"), b.voll)?;
        }
        let n = self.buses.len();
        for (i, l) in self.lines.iter().enumerate() {
            if l.id != i {
                return Err(invalid(format!("lines[{i}].id"), format!("expected {i}, got {}", l.id)));
            }
            for (field, bus) in [("from", l.from), ("to", l.to)] {
                if bus >= n {
                    return Err(invalid(format!("lines[{i}].{field}"), format!("no bus {bus}")));
                }
            }
            if l.from == l.to {
                return Err(invalid(format!("lines[{i}]"), "line connects a bus to itself"));
            }
            if !(l.reactance.is_finite() && l.reactance > 0.0) {
                return Err(invalid(format!("lines[{i}].reactance"), "must be positive"));
            }
            if !(l.capacity > 0.0) {
                return Err(invalid(format!("lines[{i}].capacity"), "must be positive"));
            }
        }
        let mut seen = BTreeSet::new();
        for (i, g) in self.generators.iter().enumerate() {
            if g.bus >= n {
                return Err(invalid(format!("generators[{i}].bus"), format!("no bus {}", g.bus)));
            }
            if !seen.insert(g.bus) {
                return Err(invalid(format!("generators[{i}].bus"), format!("bus {} already has a generator", g.bus)));
            }
            for (field, v) in [
                ("cost", g.cost),
                ("gmin", g.gmin),
                ("gmax", g.gmax),
                ("reserve_cost_up", g.reserve_cost_up),
                ("reserve_cost_down", g.reserve_cost_down),
                ("reserve_cap_up", g.reserve_cap_up),
                ("reserve_cap_down", g.reserve_cap_down),
            ] {
                finite_nonneg(format!("generators[{i}].{field}"), v)?;
            }
            if let Some(cap) = g.load_shed_cap {
                finite_nonneg(format!("generators[{i}].load_shed_cap"), cap)?;
            }
            if g.gmin > g.gmax {
                return Err(invalid(format!("generators[{i}].gmin"), "exceeds gmax"));
            }
        }
        if self.slack_bus >= n {
            return Err(invalid("slack_bus", format!("no bus {}", self.slack_bus)));
        }
        let sc = &self.scenarios;
        if !(sc.da_multiplier >= sc.se_multiplier && sc.se_multiplier >= 1.0) {
            return Err(invalid(
                "scenarios",
                "multipliers must satisfy da_multiplier >= se_multiplier >= 1",
            ));
        }
        let alpha = self.solve.alpha;
        if !(0.0..1.0).contains(&alpha) {
            return Err(invalid("solve.alpha", format!("must lie in [0, 1), got {alpha}")));
        }
        Ok(())
    }

    pub fn network(&self) -> Result<Network> {
        self.check_fields()?;
        let s = self.scale();
        let buses = self
            .buses
            .iter()
            .map(|b| Bus {
                id: b.id,
                demand: b.demand * s,
                voll: b.voll,
            })
            .collect();
        let lines = self
            .lines
            .iter()
            .map(|l| Line {
                id: l.id,
                from_bus: l.from,
                to_bus: l.to,
                reactance: l.reactance,
                capacity: l.capacity * s,
            })
            .collect();
        let gens = self
            .generators
            .iter()
            .map(|g| GeneratorSpec {
                bus: g.bus,
                cost: g.cost,
                gmin: g.gmin * s,
                gmax: g.gmax * s,
                reserve_cost_up: g.reserve_cost_up,
                reserve_cost_down: g.reserve_cost_down,
                reserve_cap_up: g.reserve_cap_up * s,
                reserve_cap_down: g.reserve_cap_down * s,
                load_shed_cap: g.load_shed_cap.map(|c| c * s),
            })
            .collect();
        Network::new(buses, lines, gens, self.slack_bus).map_err(|e| invalid("network", e.to_string()))
    }

    pub fn scenario_set(&self, network: &Network) -> Result<ScenarioSet> {
        let sc = &self.scenarios;
        let wrap = |e: Error| invalid("scenarios", e.to_string());
        match sc.mode {
            ScenarioMode::AllSingleLines => {
                let base = all_single_line_contingencies(network, 0.0, sc.da_multiplier, sc.se_multiplier).map_err(wrap)?;
                let probs = match &sc.probabilities {
                    Probabilities::Uniform(p) => vec![*p; base.len()],
                    Probabilities::PerContingency(v) => {
                        if v.len() != base.len() {
                            return Err(invalid(
                                "scenarios.probabilities",
                                format!("expected {} entries (one per non-bridge line), got {}", base.len(), v.len()),
                            ));
                        }
                        v.clone()
                    }
                };
                base.with_probabilities(&probs).map_err(|e| invalid("scenarios.probabilities", e.to_string()))
            }
            ScenarioMode::Explicit => {
                if sc.contingencies.is_empty() {
                    return Err(invalid("scenarios.contingencies", "explicit mode needs at least one contingency"));
                }
                let probs: Vec<f64> = match &sc.probabilities {
                    Probabilities::Uniform(p) => vec![*p; sc.contingencies.len()],
                    Probabilities::PerContingency(v) if v.len() == sc.contingencies.len() => v.clone(),
                    Probabilities::PerContingency(v) => {
                        return Err(invalid(
                            "scenarios.probabilities",
                            format!("expected {} entries, got {}", sc.contingencies.len(), v.len()),
                        ))
                    }
                };
                let list = sc
                    .contingencies
                    .iter()
                    .zip(&probs)
                    .enumerate()
                    .map(|(k, (c, &p))| Contingency {
                        id: k,
                        removed_lines: c.removed_lines.iter().copied().collect(),
                        probability: p,
                        da_multiplier: sc.da_multiplier,
                        se_multiplier: sc.se_multiplier,
                    })
                    .collect();
                ScenarioSet::new(network, list).map_err(wrap)
            }
        }
    }

    pub fn build(self) -> Result<Case> {
        let network = self.network()?;
        let scenarios = self.scenario_set(&network)?;
        Ok(Case {
            file: self,
            network,
            scenarios,
        })
    }

    /// Case file describing `network` in MW with the given scenario settings.
    pub fn from_network(network: &Network, scenarios: ScenarioConfig, name: Option<String>) -> Self {
        CaseFile {
            schema_version: CASE_SCHEMA_VERSION,
            name,
            base_mva: default_base(),
            units: Units::Mw,
            slack_bus: network.slack_bus,
            buses: network
                .buses
                .iter()
                .map(|b| BusRecord {
                    id: b.id,
                    demand: b.demand,
                    voll: b.voll,
                })
                .collect(),
            lines: network
                .lines
                .iter()
                .map(|l| LineRecord {
                    id: l.id,
                    from: l.from_bus,
                    to: l.to_bus,
                    reactance: l.reactance,
                    capacity: l.capacity,
                })
                .collect(),
            generators: network
                .generators
                .iter()
                .filter(|g| g.gmax > 0.0 || g.cost > 0.0)
                .map(|g| GeneratorRecord {
                    bus: g.bus,
                    cost: g.cost,
                    gmin: g.gmin,
                    gmax: g.gmax,
                    reserve_cost_up: g.reserve_cost_up,
                    reserve_cost_down: g.reserve_cost_down,
                    reserve_cap_up: g.reserve_cap_up,
                    reserve_cap_down: g.reserve_cap_down,
                    load_shed_cap: g.load_shed_cap,
                })
                .collect(),
            scenarios,
            solve: SolveConfig::default(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("case files always serialise")
    }
}

/// Parses a case from JSON text; `origin` names the source in errors.
pub fn parse_case(text: &str, origin: &str) -> Result<Case> {
    let file: CaseFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        path: format!("{origin}:{}:{}", e.line(), e.column()),
        message: e.to_string(),
    })?;
    file.build()
}

pub fn load_case(path: impl AsRef<Path>) -> Result<Case> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_case(&text, &path.display().to_string())
}
