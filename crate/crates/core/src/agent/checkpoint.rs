use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::Algorithm;
use crate::env::DamageScenario;
use crate::error::{input_err, Result};
use crate::nn::QNetworkParams;
use crate::schema::ScenarioRecord;

pub const CHECKPOINT_FORMAT: u32 = 1;

/// Policy parameters plus the episode that earned them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub format: u32,
    pub system: String,
    pub algorithm: Algorithm,
    pub resource_units: usize,
    pub episode: usize,
    pub lor: f64,
    pub scenario: ScenarioRecord,
    /// Concurrent repairs per step, 1-based component ids.
    pub steps: Vec<Vec<usize>>,
    pub network: QNetworkParams,
}

impl Checkpoint {
    pub fn component_count(&self) -> usize {
        self.network.config().output_dim
    }

    pub fn damage_scenario(&self) -> Result<DamageScenario> {
        let zero = self
            .scenario
            .damaged
            .iter()
            .map(|&c| c.checked_sub(1).ok_or_else(|| crate::Error::Input("component ids are 1-based".into())))
            .collect::<Result<Vec<_>>>()?;
        DamageScenario::from_damaged(self.scenario.label.clone(), self.component_count(), &zero)
    }

    /// Logged steps as 0-based ids.
    pub fn zero_based_steps(&self) -> Result<Vec<Vec<usize>>> {
        self.steps
            .iter()
            .map(|s| {
                s.iter()
                    .map(|&c| c.checked_sub(1).ok_or_else(|| crate::Error::Input("component ids are 1-based".into())))
                    .collect()
            })
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: Checkpoint = serde_json::from_str(text)?;
        if c.format != CHECKPOINT_FORMAT {
            return input_err(format!("unsupported checkpoint format {}", c.format));
        }
        Ok(c)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
