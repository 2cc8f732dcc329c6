use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::checkpoint::{Checkpoint, CHECKPOINT_FORMAT};
use super::config::{epsilon, ExploitationRule, TrainConfig};
use super::replay::{ReplayBuffer, Transition};
use super::select::{select_actions, SelectionRule};
use super::targets::{compute_targets, encode_batch, encode_state, input_dim};
use crate::env::{sample_scenario_with, DamageScenario, RecoveryEnv};
use crate::error::{Error, Result};
use crate::evaluation::greedy_rollout;
use crate::functionality::System;
use crate::nn::{AdamState, MlpConfig, QNetworkParams};
use crate::schema::ScenarioRecord;

/// Stream separation for the trainer's own randomness; network init uses the raw seed.
const RNG_STREAM: u64 = 0x005e_ed0f_7a41;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub episode: usize,
    /// Undiscounted sum of step rewards.
    pub reward: f64,
    pub lor: f64,
    pub steps: usize,
    pub epsilon: f64,
    /// LoR of the end-of-episode policy rolled out greedily on the same scenario.
    pub greedy_lor: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingLog {
    pub episodes: Vec<EpisodeLog>,
    /// One entry per gradient step.
    pub losses: Vec<f64>,
    pub best_episode: Option<usize>,
    pub invalid_actions: usize,
    pub target_syncs: usize,
}

impl TrainingLog {
    /// `episode,reward,lor` rows.
    pub fn write_episodes_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["episode", "reward", "lor"])?;
        for e in &self.episodes {
            w.write_record([e.episode.to_string(), e.reward.to_string(), e.lor.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// `step,loss` rows.
    pub fn write_losses_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["step", "loss"])?;
        for (i, l) in self.losses.iter().enumerate() {
            w.write_record([(i + 1).to_string(), l.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub checkpoint: Checkpoint,
    pub log: TrainingLog,
}

/// Stateful Q-learning loop. `train` drives it to completion; tests step it.
#[derive(Debug)]
pub struct Trainer<'a> {
    system: &'a System,
    cfg: TrainConfig,
    policy: QNetworkParams,
    target: QNetworkParams,
    adam: AdamState,
    buffer: ReplayBuffer,
    rng: ChaCha8Rng,
    reward_scale: f64,
    env_steps: usize,
    episode: usize,
    log: TrainingLog,
    best: Option<Checkpoint>,
}

impl<'a> Trainer<'a> {
    pub fn new(system: &'a System, cfg: &TrainConfig) -> Result<Self> {
        cfg.validate()?;
        let n = system.component_count();
        if let super::ScenarioPolicy::RandomK(k) = cfg.scenarios {
            if k == 0 || k > n {
                return Err(Error::Input(format!("random damage count {k} outside 1..={n}")));
            }
        }
        let net = MlpConfig {
            input_dim: input_dim(n, cfg.resource_units),
            output_dim: n,
            hidden: cfg.hidden.clone(),
            head: cfg.algorithm.head(),
            normalization: cfg.normalization,
            seed: cfg.seed,
        };
        let policy = QNetworkParams::init(&net)?;
        let target = policy.clone();
        Ok(Self {
            system,
            cfg: cfg.clone(),
            adam: AdamState::for_params(&policy),
            policy,
            target,
            buffer: ReplayBuffer::new(cfg.replay_capacity),
            rng: ChaCha8Rng::seed_from_u64(cfg.seed ^ RNG_STREAM),
            reward_scale: if cfg.normalize_rewards { 1.0 / system.f0() } else { 1.0 },
            env_steps: 0,
            episode: 0,
            log: TrainingLog::default(),
            best: None,
        })
    }

    pub fn config(&self) -> &TrainConfig {
        &self.cfg
    }

    pub fn policy(&self) -> &QNetworkParams {
        &self.policy
    }

    pub fn target(&self) -> &QNetworkParams {
        &self.target
    }

    pub fn env_steps(&self) -> usize {
        self.env_steps
    }

    pub fn episodes_run(&self) -> usize {
        self.episode
    }

    pub fn buffer(&self) -> &ReplayBuffer {
        &self.buffer
    }

    pub fn log(&self) -> &TrainingLog {
        &self.log
    }

    pub fn best(&self) -> Option<&Checkpoint> {
        self.best.as_ref()
    }

    fn next_scenario(&mut self) -> Result<DamageScenario> {
        let n = self.system.component_count();
        sample_scenario_with(n, self.cfg.scenarios.kind(), &mut self.rng)
    }

    fn choose(&mut self, env: &RecoveryEnv, eps: f64) -> Result<Vec<usize>> {
        let state = env.state();
        let mask: Vec<bool> = (0..state.len()).map(|i| !state.is_operational(i)).collect();
        let explore = self.rng.gen::<f64>() < eps;
        let (q, rule) = if explore {
            (vec![0.0; mask.len()], SelectionRule::Random)
        } else {
            let q = self.policy.forward(&encode_state(state, self.cfg.resource_units))?;
            let rule = match self.cfg.exploitation {
                ExploitationRule::Greedy => SelectionRule::Greedy,
                ExploitationRule::Roulette => SelectionRule::Roulette,
            };
            (q, rule)
        };
        select_actions(&q, &mask, self.cfg.resource_units, rule, &mut self.rng)
    }

    fn learn(&mut self) -> Result<()> {
        let batch = self.buffer.sample(&mut self.rng, self.cfg.batch_size);
        let u = self.cfg.resource_units;
        let targets = compute_targets(
            &batch,
            &self.policy,
            &self.target,
            self.cfg.gamma,
            self.cfg.algorithm.is_double(),
            u,
        )?;
        let states = encode_batch(batch.iter().map(|t| &t.state), u);
        let actions: Vec<usize> = batch.iter().map(|t| t.action).collect();
        let (loss, grads) = self.policy.loss_and_grads(states.view(), &actions, &targets)?;
        if !loss.is_finite() || grads.iter().any(|g| !g.is_finite()) {
            return Err(Error::Diverged { episode: self.episode, step: self.env_steps, loss });
        }
        crate::nn::adam_step(&mut self.policy, &grads, &mut self.adam, self.cfg.learning_rate);
        self.log.losses.push(loss);
        Ok(())
    }

    /// Runs one full episode with learning, returning its log entry.
    pub fn run_episode(&mut self) -> Result<EpisodeLog> {
        let scenario = self.next_scenario()?;
        let eps = epsilon(self.episode, &self.cfg);
        let mut env = RecoveryEnv::new(self.system)
            .with_resource_units(self.cfg.resource_units)?
            .with_discount(self.cfg.gamma)?;
        env.reset(&scenario)?;
        let mut steps: Vec<Vec<usize>> = Vec::new();
        while !env.done() {
            let actions = self.choose(&env, eps)?;
            let state = env.state().clone();
            let outcome = match env.step(&actions) {
                Ok(o) => o,
                Err(e) => {
                    self.log.invalid_actions += env.rejected_actions();
                    return Err(e);
                }
            };
            for &a in &actions {
                self.buffer.push(Transition {
                    state: state.clone(),
                    action: a,
                    reward: outcome.reward * self.reward_scale,
                    next_state: outcome.next_state.clone(),
                    done: outcome.done,
                });
            }
            steps.push(actions);
            self.env_steps += 1;
            if self.buffer.len() > self.cfg.batch_size {
                self.learn()?;
            }
            if self.env_steps.is_multiple_of(self.cfg.target_sync) {
                self.target.copy_from(&self.policy);
                self.log.target_syncs += 1;
            }
        }
        let record = env.record()?;
        let greedy = greedy_rollout(&self.policy, self.cfg.resource_units, self.system, &scenario)?;
        let entry = EpisodeLog {
            episode: self.episode,
            reward: record.rewards.iter().sum(),
            lor: record.lor,
            steps: steps.len(),
            epsilon: eps,
            greedy_lor: greedy.record.lor,
        };
        if self.best.as_ref().is_none_or(|b| greedy.record.lor <= b.lor) {
            self.best = Some(Checkpoint {
                format: CHECKPOINT_FORMAT,
                system: self.system.spec().name().to_string(),
                algorithm: self.cfg.algorithm,
                resource_units: self.cfg.resource_units,
                episode: self.episode,
                lor: greedy.record.lor,
                scenario: ScenarioRecord::from_scenario(&scenario),
                steps: greedy.steps.iter().map(|s| s.iter().map(|c| c + 1).collect()).collect(),
                network: self.policy.clone(),
            });
            self.log.best_episode = Some(self.episode);
        }
        self.log.episodes.push(entry.clone());
        self.episode += 1;
        Ok(entry)
    }

    pub fn finish(self) -> Result<TrainOutcome> {
        let checkpoint = self.best.ok_or_else(|| Error::Contract("no episode was run".into()))?;
        Ok(TrainOutcome { checkpoint, log: self.log })
    }
}

/// Trains for `cfg.episodes` episodes.
///
/// After every episode the current policy is rolled out greedily on that
/// episode's scenario; the policy with the lowest such LoR is kept, the later
/// one on ties. The checkpoint's LoR is therefore exactly what its own
/// rollout produces.
pub fn train(system: &System, cfg: &TrainConfig) -> Result<TrainOutcome> {
    let mut trainer = Trainer::new(system, cfg)?;
    for _ in 0..cfg.episodes {
        trainer.run_episode()?;
    }
    trainer.finish()
}
