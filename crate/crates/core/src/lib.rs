//! Resilience-driven repair sequencing for graph-modeled infrastructure.
//!
//! A system is a directed graph whose edges are repairable components.
//! After a disaster some components are damaged; repairing them one at a time
//! restores functionality along a staircase resilience curve. The crate
//! learns repair orders that minimize the lack of resilience (the area above
//! that curve) with deep Q-learning, and checks them against exhaustive
//! enumeration and a genetic algorithm.

pub mod agent;
pub mod baselines;
pub mod env;
pub mod error;
pub mod evaluation;
pub mod fixtures;
pub mod functionality;
pub mod graph;
pub mod nn;
pub mod schema;

pub use agent::{train, Algorithm, Checkpoint, TrainConfig, TrainOutcome, TrainingLog};
pub use baselines::{enumerate_optimal, ga_optimize, GaConfig, SequenceSolution};
pub use env::{
    compute_lor, replay, sample_scenario, valid_actions, DamageScenario, EpisodeRecord,
    RecoveryEnv, ResilienceCurve, ScenarioKind, StepOutcome,
};
pub use error::{Error, Result};
pub use evaluation::{batch_eval, compare, cross_test, rollout, ComparisonReport};
pub use fixtures::{load_fixture, Fixture};
pub use functionality::{evaluate, full_functionality, BaySpec, Evaluator, FunctionalityModel, Part, System};
pub use graph::{build_adjacency, reachability, BitMatrix, Edge, ReachabilityMatrix, StateVector, SystemSpec};
pub use nn::{Head, MlpConfig, QNetworkParams};
