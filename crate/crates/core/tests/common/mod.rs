//! Independent oracles shared by the property tests and the acceptance suite.
#![allow(dead_code)]

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use repairq::env::{sample_scenario_with, RecoveryEnv, ScenarioKind};
use repairq::nn::{Head, MlpConfig, QNetworkParams};
use repairq::{load_fixture, reachability, BitMatrix, System};

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}

fn random_net(rng: &mut ChaCha8Rng) -> QNetworkParams {
    let depth = rng.gen_range(1..=3);
    let width = rng.gen_range(2..=16);
    // equal widths exercise shared normalization; a ragged last layer adds a second slot
    let mut hidden = vec![width; depth];
    if depth > 1 && rng.gen_bool(0.3) {
        hidden[depth - 1] = rng.gen_range(2..=16);
    }
    let cfg = MlpConfig {
        input_dim: rng.gen_range(1..=6),
        output_dim: rng.gen_range(2..=5),
        hidden,
        head: if rng.gen_bool(0.5) { Head::Dueling } else { Head::Plain },
        normalization: rng.gen_bool(0.5),
        seed: rng.gen(),
    };
    let mut p = QNetworkParams::init(&cfg).unwrap();
    // move gains and biases off their initial values so every path is exercised
    for v in p.values_mut() {
        *v += rng.gen_range(-0.2..0.2);
    }
    p
}

pub struct GradientReport {
    pub worst: f64,
    pub plain: usize,
    pub dueling: usize,
    pub normalized: usize,
    pub unnormalized: usize,
}

/// Worst relative error between backprop and central differences (step `h`).
pub fn gradient_check(nets: usize, h: f64, seed: u64) -> GradientReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = GradientReport { worst: 0.0, plain: 0, dueling: 0, normalized: 0, unnormalized: 0 };
    for _ in 0..nets {
        let p = random_net(&mut rng);
        let cfg = p.config().clone();
        match cfg.head {
            Head::Plain => rep.plain += 1,
            Head::Dueling => rep.dueling += 1,
        }
        if cfg.normalization {
            rep.normalized += 1;
        } else {
            rep.unnormalized += 1;
        }
        let b = rng.gen_range(1..=5);
        let states = Array2::from_shape_fn((b, cfg.input_dim), |_| rng.gen_range(-1.0..1.0));
        let actions: Vec<usize> = (0..b).map(|_| rng.gen_range(0..cfg.output_dim)).collect();
        let targets: Vec<f64> = (0..b).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let (_, grads) = p.loss_and_grads(states.view(), &actions, &targets).unwrap();
        for (i, &g) in grads.iter().enumerate() {
            let mut plus = p.clone();
            plus.values_mut()[i] += h;
            let mut minus = p.clone();
            minus.values_mut()[i] -= h;
            let lp = plus.loss_and_grads(states.view(), &actions, &targets).unwrap().0;
            let lm = minus.loss_and_grads(states.view(), &actions, &targets).unwrap().0;
            rep.worst = rep.worst.max(rel_err(g, (lp - lm) / (2.0 * h)));
        }
    }
    rep
}

/// Largest |mean_a Q(s, a) - V(s)| over random inputs to a dueling network.
pub fn dueling_identity(inputs: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = MlpConfig {
        input_dim: 5,
        output_dim: 4,
        hidden: vec![8, 8],
        head: Head::Dueling,
        normalization: true,
        seed,
    };
    let p = QNetworkParams::init(&cfg).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..inputs {
        let x: Vec<f64> = (0..5).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let q = p.forward(&x).unwrap();
        let (v, _) = p.value_and_advantage(&x).unwrap();
        let mean = q.iter().sum::<f64>() / q.len() as f64;
        worst = worst.max((mean - v).abs());
    }
    worst
}

fn dfs_reaches(adj: &[Vec<bool>], from: usize, to: usize) -> bool {
    let n = adj.len();
    let mut seen = vec![false; n];
    let mut stack: Vec<usize> = (0..n).filter(|&j| adj[from][j]).collect();
    while let Some(v) = stack.pop() {
        if v == to {
            return true;
        }
        if std::mem::replace(&mut seen[v], true) {
            continue;
        }
        stack.extend((0..n).filter(|&j| adj[v][j] && !seen[j]));
    }
    false
}

/// Vertex pairs where the closure disagrees with DFS path existence.
pub fn closure_mismatches(graphs: usize, max_vertices: usize, seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = 0;
    for _ in 0..graphs {
        let n = rng.gen_range(1..=max_vertices);
        let p = rng.gen_range(0.05..0.6);
        let rows: Vec<Vec<bool>> = (0..n).map(|_| (0..n).map(|_| rng.gen_bool(p)).collect()).collect();
        let r = reachability(&BitMatrix::from_rows(&rows).unwrap());
        for i in 0..n {
            for j in 0..n {
                if r.reachable(i, j) != dfs_reaches(&rows, i, j) {
                    bad += 1;
                }
            }
        }
    }
    bad
}

/// Worst |sum(reward * duration) - (F0 - F(s0))| over random episodes, and
/// the number of refused actions.
pub fn telescoping(triples: usize, seed: u64) -> (f64, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let systems: Vec<System> = ["mimo", "substation"].iter().map(|n| load_fixture(n).unwrap()).collect();
    let mut worst: f64 = 0.0;
    let mut rejected = 0;
    for _ in 0..triples {
        let sys = &systems[rng.gen_range(0..systems.len())];
        let n = sys.component_count();
        let k = rng.gen_range(1..=n);
        let scenario = sample_scenario_with(n, ScenarioKind::RandomK(k), &mut rng).unwrap();
        let units = rng.gen_range(1..=3);
        let mut env = RecoveryEnv::new(sys).with_resource_units(units).unwrap();
        env.reset(&scenario).unwrap();
        let fd = env.functionality();
        let mut total = 0.0;
        while !env.done() {
            let mut valid = env.valid_actions();
            valid.shuffle(&mut rng);
            valid.truncate(rng.gen_range(1..=units));
            let o = env.step(&valid).unwrap();
            total += o.reward * o.elapsed;
        }
        worst = worst.max((total - (sys.f0() - fd)).abs());
        rejected += env.rejected_actions();
    }
    (worst, rejected)
}
