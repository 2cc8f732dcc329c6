use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use repairq::agent::{select_actions, ScenarioPolicy, SelectionRule, Trainer};
use repairq::evaluation::{replay_steps, rollout};
use repairq::{load_fixture, train, Algorithm, Checkpoint, TrainConfig};

fn small(alg: Algorithm, episodes: usize, seed: u64) -> TrainConfig {
    TrainConfig { episodes, seed, batch_size: 32, ..TrainConfig::mimo(alg) }
}

#[test]
fn target_changes_only_at_sync_steps() {
    let sys = load_fixture("mimo").unwrap();
    let cfg = TrainConfig { batch_size: 8, target_sync: 7, ..small(Algorithm::Dqn, 40, 3) };
    let mut t = Trainer::new(&sys, &cfg).unwrap();
    let mut syncs = 0;
    for _ in 0..cfg.episodes {
        let before = t.target().clone();
        let steps_before = t.env_steps();
        t.run_episode().unwrap();
        let crossed = t.env_steps() / 7 - steps_before / 7;
        syncs += crossed;
        if crossed == 0 {
            assert_eq!(t.target(), &before);
        }
    }
    assert!(syncs > 0);
    assert_eq!(t.log().target_syncs, syncs);
    assert!(!t.log().losses.is_empty());
}

#[test]
fn every_algorithm_trains_without_invalid_actions() {
    let sys = load_fixture("mimo").unwrap();
    for alg in Algorithm::ALL {
        let out = train(&sys, &small(alg, 30, 1)).unwrap();
        assert_eq!(out.log.invalid_actions, 0);
        assert_eq!(out.log.episodes.len(), 30);
        assert!(!out.log.losses.is_empty());
        assert!(out.log.losses.iter().all(|l| l.is_finite()));
    }
}

#[test]
fn random_damage_and_multiple_units() {
    let sys = load_fixture("substation").unwrap();
    let cfg = TrainConfig {
        episodes: 6,
        batch_size: 16,
        resource_units: 3,
        scenarios: ScenarioPolicy::RandomK(10),
        hidden: vec![16],
        ..TrainConfig::substation(Algorithm::DuelDdqn)
    };
    let out = train(&sys, &cfg).unwrap();
    assert_eq!(out.log.invalid_actions, 0);
    let cp = &out.checkpoint;
    assert_eq!(cp.scenario.damaged.len(), 10);
    assert!(cp.steps.iter().all(|s| !s.is_empty() && s.len() <= 3));
    let r = replay_steps(&sys, &cp.damage_scenario().unwrap(), &cp.zero_based_steps().unwrap(), 3).unwrap();
    assert_eq!(r.lor, cp.lor);
}

#[test]
fn identical_seeds_give_identical_runs() {
    let sys = load_fixture("mimo").unwrap();
    let a = train(&sys, &small(Algorithm::Ddqn, 40, 9)).unwrap();
    let b = train(&sys, &small(Algorithm::Ddqn, 40, 9)).unwrap();
    assert_eq!(a.log, b.log);
    assert_eq!(a.checkpoint.to_json().unwrap(), b.checkpoint.to_json().unwrap());
    let c = train(&sys, &small(Algorithm::Ddqn, 40, 10)).unwrap();
    assert_ne!(a.log.losses, c.log.losses);
}

#[test]
fn checkpoint_replays_to_logged_lor() {
    let sys = load_fixture("mimo").unwrap();
    let out = train(&sys, &small(Algorithm::DuelDqn, 60, 4)).unwrap();
    let cp = Checkpoint::from_json(&out.checkpoint.to_json().unwrap()).unwrap();
    let scenario = cp.damage_scenario().unwrap();
    let r = rollout(&cp, &sys, &scenario).unwrap();
    assert_eq!(r.record.lor, cp.lor);
    let replayed = replay_steps(&sys, &scenario, &cp.zero_based_steps().unwrap(), 1).unwrap();
    assert_eq!(replayed.lor, cp.lor);
    let best = out.log.episodes.iter().map(|e| e.greedy_lor).fold(f64::INFINITY, f64::min);
    assert_eq!(cp.lor, best);
    assert_eq!(out.log.episodes[cp.episode].greedy_lor, cp.lor);
}

#[test]
fn uniform_exploration_is_uniform_over_valid_actions() {
    let mask = [true, false, true, true, false, true, true];
    let valid: Vec<usize> = (0..mask.len()).filter(|&i| mask[i]).collect();
    let q = vec![0.0; mask.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let draws = 100_000;
    let mut counts = vec![0usize; mask.len()];
    for _ in 0..draws {
        counts[select_actions(&q, &mask, 1, SelectionRule::Random, &mut rng).unwrap()[0]] += 1;
    }
    assert!(mask.iter().zip(&counts).all(|(&m, &c)| m || c == 0));
    let expect = draws as f64 / valid.len() as f64;
    let chi2: f64 = valid.iter().map(|&i| (counts[i] as f64 - expect).powi(2) / expect).sum();
    // 4 degrees of freedom, p = 0.001
    assert!(chi2 < 18.47, "chi-square {chi2}");
}

#[test]
fn full_epsilon_training_explores_uniformly() {
    let sys = load_fixture("mimo").unwrap();
    let cfg = TrainConfig { eps_start: 1.0, eps_end: 1.0, ..small(Algorithm::Dqn, 4000, 2) };
    let mut t = Trainer::new(&sys, &TrainConfig { batch_size: 100_000, replay_capacity: 100_000, ..cfg }).unwrap();
    for _ in 0..4000 {
        t.run_episode().unwrap();
    }
    // first action of each worst-case episode: one of 5 components
    let mut counts = [0usize; 5];
    for tr in t.buffer().iter().filter(|tr| tr.state.damaged_count() == 5) {
        counts[tr.action] += 1;
    }
    let total: usize = counts.iter().sum();
    assert_eq!(total, 4000);
    let expect = total as f64 / 5.0;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expect).powi(2) / expect).sum();
    assert!(chi2 < 18.47, "chi-square {chi2} from {counts:?}");
}
