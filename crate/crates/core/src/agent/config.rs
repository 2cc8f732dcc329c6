use serde::{Deserialize, Serialize};

use crate::env::ScenarioKind;
use crate::error::{input_err, Result};
use crate::nn::Head;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Dqn,
    Ddqn,
    DuelDqn,
    DuelDdqn,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Dqn, Algorithm::Ddqn, Algorithm::DuelDqn, Algorithm::DuelDdqn];

    /// Whether the bootstrap action is chosen by the policy network.
    pub fn is_double(self) -> bool {
        matches!(self, Algorithm::Ddqn | Algorithm::DuelDdqn)
    }

    pub fn head(self) -> Head {
        match self {
            Algorithm::Dqn | Algorithm::Ddqn => Head::Plain,
            Algorithm::DuelDqn | Algorithm::DuelDdqn => Head::Dueling,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Dqn => "dqn",
            Algorithm::Ddqn => "ddqn",
            Algorithm::DuelDqn => "duel-dqn",
            Algorithm::DuelDdqn => "duel-ddqn",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| crate::Error::Input(format!("unknown algorithm `{s}`")))
    }
}

/// How actions are picked on exploitation draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExploitationRule {
    Greedy,
    Roulette,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioPolicy {
    FixedWorstCase,
    RandomK(usize),
}

impl ScenarioPolicy {
    pub fn kind(self) -> ScenarioKind {
        match self {
            ScenarioPolicy::FixedWorstCase => ScenarioKind::WorstCase,
            ScenarioPolicy::RandomK(k) => ScenarioKind::RandomK(k),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub algorithm: Algorithm,
    pub eps_start: f64,
    pub eps_end: f64,
    /// Episodes over which epsilon decays linearly.
    pub eps_decay: f64,
    pub replay_capacity: usize,
    pub batch_size: usize,
    pub gamma: f64,
    pub learning_rate: f64,
    /// Environment steps between target-network syncs.
    pub target_sync: usize,
    pub episodes: usize,
    pub exploitation: ExploitationRule,
    pub scenarios: ScenarioPolicy,
    pub hidden: Vec<usize>,
    pub normalization: bool,
    pub resource_units: usize,
    /// Store rewards divided by F0 in the replay memory. Logged rewards stay in MW/day.
    pub normalize_rewards: bool,
    pub seed: u64,
}

impl TrainConfig {
    /// Settings tuned for the five-component MIMO system.
    pub fn mimo(algorithm: Algorithm) -> Self {
        Self {
            algorithm,
            eps_start: 0.9,
            eps_end: 0.05,
            eps_decay: 100.0,
            replay_capacity: 10_000,
            batch_size: 256,
            gamma: 0.95,
            learning_rate: 1e-3,
            target_sync: 50,
            episodes: 500,
            exploitation: ExploitationRule::Greedy,
            scenarios: ScenarioPolicy::FixedWorstCase,
            hidden: vec![32],
            normalization: false,
            resource_units: 1,
            normalize_rewards: true,
            seed: 0,
        }
    }

    /// Settings tuned for the 43-component substation.
    pub fn substation(algorithm: Algorithm) -> Self {
        Self {
            algorithm,
            eps_start: 1.0,
            eps_end: 0.001,
            eps_decay: 1000.0,
            replay_capacity: 100_000,
            batch_size: 128,
            gamma: 0.95,
            learning_rate: 1e-4,
            target_sync: 100,
            episodes: 10_000,
            exploitation: ExploitationRule::Roulette,
            scenarios: ScenarioPolicy::FixedWorstCase,
            hidden: vec![128, 128],
            normalization: true,
            resource_units: 1,
            normalize_rewards: true,
            seed: 0,
        }
    }

    /// Defaults keyed by system name: `mimo`, otherwise the substation set.
    pub fn for_system(name: &str, algorithm: Algorithm) -> Self {
        match name {
            "mimo" => Self::mimo(algorithm),
            _ => Self::substation(algorithm),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0 <= self.eps_end && self.eps_end <= self.eps_start && self.eps_start <= 1.0) {
            return input_err("epsilon must satisfy 0 <= end <= start <= 1");
        }
        if self.eps_decay.is_nan() || self.eps_decay <= 0.0 {
            return input_err("epsilon decay must be positive");
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return input_err("discount must lie in [0, 1]");
        }
        if self.batch_size == 0 || self.replay_capacity < self.batch_size {
            return input_err("need replay capacity >= batch size >= 1");
        }
        if self.target_sync == 0 || self.episodes == 0 || self.resource_units == 0 {
            return input_err("sync period, episodes and resource units must be positive");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return input_err("learning rate must be positive");
        }
        Ok(())
    }
}

/// Linearly decayed exploration rate, floored at `eps_end`.
pub fn epsilon(episode: usize, cfg: &TrainConfig) -> f64 {
    let eps = cfg.eps_start - (cfg.eps_start - cfg.eps_end) / cfg.eps_decay * episode as f64;
    eps.max(cfg.eps_end)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mimo_schedule_endpoints() {
        let c = TrainConfig::mimo(Algorithm::Dqn);
        assert_eq!(epsilon(0, &c), 0.9);
        assert!((epsilon(100, &c) - 0.05).abs() < 1e-15);
        assert_eq!(epsilon(1000, &c), 0.05);
        assert!((epsilon(50, &c) - 0.475).abs() < 1e-12);
    }

    #[test]
    fn substation_schedule_endpoints() {
        let c = TrainConfig::substation(Algorithm::Ddqn);
        assert_eq!(epsilon(0, &c), 1.0);
        assert!((epsilon(1000, &c) - 0.001).abs() < 1e-12);
        assert_eq!(epsilon(10_000, &c), 0.001);
    }

    #[test]
    fn invariants_enforced() {
        let good = TrainConfig::mimo(Algorithm::Dqn);
        assert!(good.validate().is_ok());
        let mut c = good.clone();
        c.eps_end = 0.95;
        assert!(c.validate().is_err());
        let mut c = good.clone();
        c.gamma = 1.5;
        assert!(c.validate().is_err());
        let mut c = good.clone();
        c.replay_capacity = 10;
        assert!(c.validate().is_err());
        let mut c = good.clone();
        c.target_sync = 0;
        assert!(c.validate().is_err());
        let mut c = good;
        c.episodes = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn algorithm_names() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert!("sarsa".parse::<Algorithm>().is_err());
    }
}
