//! JSON file formats. All vertex and component ids in files are 1-based.
//!
//! System file:
//!
//! ```json
//! {
//!   "name": "mimo",
//!   "provenance": { "source": "...", "approximate": true, "notes": ["..."] },
//!   "vertices": 6,
//!   "edges": [[1, 3, 1], [2, 3, 2]],
//!   "sources": [1, 2],
//!   "loads": [5, 6],
//!   "components": { "count": 5, "duration": 1.0 },
//!   "bays": [{ "part": "input", "breakpoint": 3, "capacity": 60.0, "component": 1 }],
//!   "evaluator": "capacity_sum",
//!   "scenarios": { "fig7d": { "damaged": [2, 4, 5] }, "ds1": { "random_k": 8, "seed": 1 } }
//! }
//! ```
//!
//! `duration` is either one number for every component or a per-component
//! list. Scenario entries are `{"damaged": [...]}`, `{"random_k": k, "seed": s}`
//! or `{"worst_case": true}`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::env::{sample_scenario, DamageScenario, ScenarioKind};
use crate::error::{input_err, Result};
use crate::functionality::{BaySpec, Evaluator, FunctionalityModel, Part, System};
use crate::graph::{Edge, StateVector, SystemSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
    pub vertices: usize,
    pub edges: Vec<[usize; 3]>,
    pub sources: Vec<usize>,
    pub loads: Vec<usize>,
    pub components: ComponentsEntry,
    pub bays: Vec<BayEntry>,
    pub evaluator: Evaluator,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub scenarios: BTreeMap<String, ScenarioEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: String,
    pub approximate: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    /// Transcription confidence per named entry group.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub confidence: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentsEntry {
    pub count: usize,
    #[serde(default = "Durations::unit")]
    pub duration: Durations,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Durations {
    Uniform(f64),
    PerComponent(Vec<f64>),
}

impl Durations {
    fn unit() -> Self {
        Durations::Uniform(1.0)
    }

    fn expand(&self, n: usize) -> Vec<f64> {
        match self {
            Durations::Uniform(d) => vec![*d; n],
            Durations::PerComponent(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BayEntry {
    pub part: Part,
    pub breakpoint: usize,
    pub capacity: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub component: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScenarioEntry {
    Damaged { damaged: Vec<usize> },
    Random { random_k: usize, seed: u64 },
    WorstCase { worst_case: bool },
}

fn to_zero(id: usize, what: &str) -> Result<usize> {
    match id.checked_sub(1) {
        Some(v) => Ok(v),
        None => input_err(format!("{what} ids are 1-based; got 0")),
    }
}

impl SystemFile {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn spec(&self) -> Result<SystemSpec> {
        let edges = self
            .edges
            .iter()
            .map(|&[f, t, c]| {
                Ok(Edge {
                    from: to_zero(f, "vertex")?,
                    to: to_zero(t, "vertex")?,
                    component: to_zero(c, "component")?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let shift = |vs: &[usize]| vs.iter().map(|&v| to_zero(v, "vertex")).collect::<Result<_>>();
        SystemSpec::new(
            self.name.clone(),
            self.vertices,
            self.components.count,
            edges,
            shift(&self.sources)?,
            shift(&self.loads)?,
            Some(self.components.duration.expand(self.components.count)),
        )
    }

    pub fn model(&self) -> Result<FunctionalityModel> {
        let bays = self
            .bays
            .iter()
            .map(|b| {
                Ok(BaySpec {
                    part: b.part,
                    breakpoint: to_zero(b.breakpoint, "vertex")?,
                    capacity: b.capacity,
                    component: b.component.map(|c| to_zero(c, "component")).transpose()?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FunctionalityModel::new(bays, self.evaluator))
    }

    pub fn system(&self) -> Result<System> {
        System::new(self.spec()?, self.model()?)
    }

    /// Resolves a named catalog scenario for this system.
    pub fn scenario(&self, name: &str) -> Result<DamageScenario> {
        let n = self.components.count;
        let entry = match self.scenarios.get(name) {
            Some(e) => e,
            None if name == "worst" || name == "worst-case" => {
                return Ok(DamageScenario::worst_case(n));
            }
            None => return input_err(format!("system `{}` has no scenario `{name}`", self.name)),
        };
        let mut s = match entry {
            ScenarioEntry::Damaged { damaged } => {
                let zero = damaged.iter().map(|&c| to_zero(c, "component")).collect::<Result<Vec<_>>>()?;
                DamageScenario::from_damaged(name, n, &zero)?
            }
            ScenarioEntry::Random { random_k, seed } => {
                sample_scenario(n, ScenarioKind::RandomK(*random_k), *seed)?
            }
            ScenarioEntry::WorstCase { .. } => DamageScenario::worst_case(n),
        };
        s.label = name.to_string();
        Ok(s)
    }

    /// Snapshot of a validated system (without provenance or scenarios).
    pub fn from_system(system: &System) -> Self {
        let spec = system.spec();
        let durations = spec.repair_durations().to_vec();
        let duration = if durations.iter().all(|d| *d == durations[0]) {
            Durations::Uniform(durations[0])
        } else {
            Durations::PerComponent(durations)
        };
        SystemFile {
            name: spec.name().to_string(),
            provenance: None,
            vertices: spec.vertex_count(),
            edges: spec.edges().iter().map(|e| [e.from + 1, e.to + 1, e.component + 1]).collect(),
            sources: spec.sources().iter().map(|v| v + 1).collect(),
            loads: spec.loads().iter().map(|v| v + 1).collect(),
            components: ComponentsEntry { count: spec.component_count(), duration },
            bays: system
                .model()
                .bays
                .iter()
                .map(|b| BayEntry {
                    part: b.part,
                    breakpoint: b.breakpoint + 1,
                    capacity: b.capacity,
                    component: b.component.map(|c| c + 1),
                })
                .collect(),
            evaluator: system.model().evaluator,
            scenarios: BTreeMap::new(),
        }
    }
}

/// A list of damage scenarios, as written by `genscenarios`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioSetFile {
    pub system: String,
    pub components: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorEntry>,
    pub scenarios: Vec<ScenarioRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorEntry {
    pub k: Vec<usize>,
    pub count: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioRecord {
    pub label: String,
    /// 1-based damaged component ids.
    pub damaged: Vec<usize>,
}

impl ScenarioRecord {
    pub fn from_scenario(s: &DamageScenario) -> Self {
        Self { label: s.label.clone(), damaged: s.damaged().iter().map(|c| c + 1).collect() }
    }
}

impl ScenarioSetFile {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn scenarios(&self) -> Result<Vec<DamageScenario>> {
        self.scenarios
            .iter()
            .map(|r| {
                let zero = r.damaged.iter().map(|&c| to_zero(c, "component")).collect::<Result<Vec<_>>>()?;
                DamageScenario::from_damaged(r.label.clone(), self.components, &zero)
            })
            .collect()
    }

    pub fn from_scenarios(system: &str, components: usize, scenarios: &[DamageScenario]) -> Self {
        Self {
            system: system.to_string(),
            components,
            generator: None,
            scenarios: scenarios.iter().map(ScenarioRecord::from_scenario).collect(),
        }
    }
}

/// Formats a 0-based order as the 1-based `4-5-2` form used in reports.
pub fn format_sequence(order: &[usize]) -> String {
    order.iter().map(|c| (c + 1).to_string()).collect::<Vec<_>>().join("-")
}

/// Inverse of [`format_sequence`].
pub fn parse_sequence(text: &str) -> Result<Vec<usize>> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split('-')
        .map(|t| {
            let id: usize = t.trim().parse().map_err(|_| crate::Error::Input(format!("bad id `{t}`")))?;
            to_zero(id, "component")
        })
        .collect()
}

#[doc(hidden)]
pub fn state_from_damaged_one_based(n: usize, damaged: &[usize]) -> Result<StateVector> {
    let zero = damaged.iter().map(|&c| to_zero(c, "component")).collect::<Result<Vec<_>>>()?;
    StateVector::with_damaged(n, &zero)
}
