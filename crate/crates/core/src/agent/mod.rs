//! Deep Q-learning agents for repair sequencing.
//!
//! All four variants share one loop: epsilon-greedy exploration over the
//! damaged components, a FIFO replay memory, and a periodically synced
//! target network. They differ only in the head (plain or dueling) and in
//! which network picks the bootstrap action.

mod checkpoint;
mod config;
mod replay;
mod select;
mod targets;
mod train;

pub use checkpoint::{Checkpoint, CHECKPOINT_FORMAT};
pub use config::{epsilon, Algorithm, ExploitationRule, ScenarioPolicy, TrainConfig};
pub use replay::{ReplayBuffer, Transition};
pub use select::{roulette_weights, select_actions, SelectionRule, ROULETTE_FLOOR};
pub use targets::{compute_targets, encode_batch, encode_state, input_dim};
pub use train::{train, EpisodeLog, TrainOutcome, Trainer, TrainingLog};
