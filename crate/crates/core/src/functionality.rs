//! System functionality as the bottleneck of three bay groups.
//!
//! Each bay belongs to the input, transform, or output part and contributes
//! its load capacity when it is serviceable. Functionality is the minimum of
//! the three per-part totals, i.e. the transmission capacity the weakest
//! stage can still carry.
//!
//! Two evaluators decide serviceability:
//!
//! * [`Evaluator::CapacitySum`]: a bay is serviceable iff its own component
//!   is operational.
//! * [`Evaluator::PathAccessibility`]: a bay is serviceable iff some source
//!   reaches its breakpoint vertex and the breakpoint reaches some load in
//!   the state-filtered graph. A bay that also names a component additionally
//!   requires that component to be operational, which lets small systems
//!   whose bays share graph vertices still isolate each bay.

use serde::{Deserialize, Serialize};

use crate::error::{input_err, Result};
use crate::graph::{build_adjacency, reachability, StateVector, SystemSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Part {
    Input,
    Transform,
    Output,
}

impl Part {
    pub const ALL: [Part; 3] = [Part::Input, Part::Transform, Part::Output];

    fn index(self) -> usize {
        match self {
            Part::Input => 0,
            Part::Transform => 1,
            Part::Output => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Evaluator {
    CapacitySum,
    PathAccessibility,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaySpec {
    pub part: Part,
    pub breakpoint: usize,
    /// Load capacity in MW.
    pub capacity: f64,
    pub component: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalityModel {
    pub bays: Vec<BaySpec>,
    pub evaluator: Evaluator,
}

impl FunctionalityModel {
    pub fn new(bays: Vec<BaySpec>, evaluator: Evaluator) -> Self {
        Self { bays, evaluator }
    }

    pub fn with_evaluator(&self, evaluator: Evaluator) -> Self {
        Self { bays: self.bays.clone(), evaluator }
    }

    /// Checks the model against the system it will be evaluated on.
    pub fn validate(&self, spec: &SystemSpec) -> Result<()> {
        let mut totals = [0.0; 3];
        let mut counts = [0usize; 3];
        for (i, bay) in self.bays.iter().enumerate() {
            if !(bay.capacity.is_finite() && bay.capacity >= 0.0) {
                return input_err(format!("bay {i}: capacity must be finite and >= 0"));
            }
            if bay.breakpoint >= spec.vertex_count() {
                return input_err(format!("bay {i}: breakpoint {} out of range", bay.breakpoint));
            }
            if spec.sources().contains(&bay.breakpoint) || spec.loads().contains(&bay.breakpoint) {
                return input_err(format!(
                    "bay {i}: breakpoint {} is a source or load vertex",
                    bay.breakpoint
                ));
            }
            match bay.component {
                Some(c) if c >= spec.component_count() => {
                    return input_err(format!("bay {i}: component {c} out of range"));
                }
                None if self.evaluator == Evaluator::CapacitySum => {
                    return input_err(format!("bay {i}: capacity-sum bays need a component"));
                }
                _ => {}
            }
            totals[bay.part.index()] += bay.capacity;
            counts[bay.part.index()] += 1;
        }
        for part in Part::ALL {
            if counts[part.index()] == 0 {
                return input_err(format!("no {part:?} bay defined"));
            }
            if totals[part.index()] <= 0.0 {
                return input_err(format!("{part:?} bays have zero total capacity"));
            }
        }
        Ok(())
    }

    /// Per-part serviceable capacity `[P_input, P_transform, P_output]`.
    pub fn part_totals(&self, spec: &SystemSpec, state: &StateVector) -> Result<[f64; 3]> {
        spec.check_state(state)?;
        let mut totals = [0.0; 3];
        match self.evaluator {
            Evaluator::CapacitySum => {
                for bay in &self.bays {
                    let c = bay.component.ok_or_else(|| {
                        crate::Error::Input("capacity-sum bay without component".into())
                    })?;
                    if state.is_operational(c) {
                        totals[bay.part.index()] += bay.capacity;
                    }
                }
            }
            Evaluator::PathAccessibility => {
                let r = reachability(&build_adjacency(spec, state)?);
                for bay in &self.bays {
                    if let Some(c) = bay.component {
                        if !state.is_operational(c) {
                            continue;
                        }
                    }
                    if r.any_reaches(spec.sources(), bay.breakpoint)?
                        && r.reaches_any(bay.breakpoint, spec.loads())?
                    {
                        totals[bay.part.index()] += bay.capacity;
                    }
                }
            }
        }
        Ok(totals)
    }
}

/// Functionality `F = min(P_input, P_transform, P_output)` in MW.
pub fn evaluate(spec: &SystemSpec, model: &FunctionalityModel, state: &StateVector) -> Result<f64> {
    let t = model.part_totals(spec, state)?;
    Ok(t[0].min(t[1]).min(t[2]))
}

/// Functionality with every component operational.
pub fn full_functionality(spec: &SystemSpec, model: &FunctionalityModel) -> Result<f64> {
    evaluate(spec, model, &StateVector::all_operational(spec.component_count()))
}

/// A validated system: topology, functionality model, and its intact level.
#[derive(Debug, Clone, PartialEq)]
pub struct System {
    spec: SystemSpec,
    model: FunctionalityModel,
    f0: f64,
}

impl System {
    pub fn new(spec: SystemSpec, model: FunctionalityModel) -> Result<Self> {
        model.validate(&spec)?;
        let f0 = full_functionality(&spec, &model)?;
        Ok(Self { spec, model, f0 })
    }

    pub fn spec(&self) -> &SystemSpec {
        &self.spec
    }

    pub fn model(&self) -> &FunctionalityModel {
        &self.model
    }

    pub fn component_count(&self) -> usize {
        self.spec.component_count()
    }

    /// Intact functionality `F0`.
    pub fn f0(&self) -> f64 {
        self.f0
    }

    pub fn functionality(&self, state: &StateVector) -> Result<f64> {
        evaluate(&self.spec, &self.model, state)
    }

    /// Same system evaluated with a different serviceability rule.
    pub fn with_evaluator(&self, evaluator: Evaluator) -> Result<Self> {
        Self::new(self.spec.clone(), self.model.with_evaluator(evaluator))
    }
}
