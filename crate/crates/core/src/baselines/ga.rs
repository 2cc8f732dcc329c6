use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::enumerate::{curve_of, SequenceSolution};
use crate::env::DamageScenario;
use crate::error::{input_err, Result};
use crate::functionality::System;
use crate::graph::StateVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub population_size: usize,
    pub generations: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub tournament_size: usize,
    pub elite_count: usize,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 100,
            generations: 200,
            crossover_rate: 0.8,
            mutation_rate: 0.2,
            tournament_size: 3,
            elite_count: 2,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.population_size == 0 || self.tournament_size == 0 {
            return input_err("population and tournament sizes must be positive");
        }
        if self.elite_count > self.population_size {
            return input_err("elite count exceeds population size");
        }
        for (name, r) in [("crossover", self.crossover_rate), ("mutation", self.mutation_rate)] {
            if !(0.0..=1.0).contains(&r) {
                return input_err(format!("{name} rate must lie in [0, 1]"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaOutcome {
    pub best: SequenceSolution,
    /// Best-ever LoR after initialization and after each generation.
    pub history: Vec<f64>,
}

/// LoR evaluator with a per-run functionality cache.
struct Fitness<'a> {
    system: &'a System,
    initial: &'a StateVector,
    cache: HashMap<StateVector, f64>,
}

impl Fitness<'_> {
    fn functionality(&mut self, s: &StateVector) -> Result<f64> {
        if let Some(&f) = self.cache.get(s) {
            return Ok(f);
        }
        let f = self.system.functionality(s)?;
        self.cache.insert(s.clone(), f);
        Ok(f)
    }

    /// LoR of `genome` and the length of the prefix used.
    fn lor(&mut self, genome: &[usize]) -> Result<(f64, usize)> {
        let f0 = self.system.f0();
        let mut s = self.initial.clone();
        let mut f = self.functionality(&s)?;
        let mut lor = 0.0;
        for (i, &c) in genome.iter().enumerate() {
            if f >= f0 {
                return Ok((lor, i));
            }
            lor += (f0 - f) * self.system.spec().repair_duration(c);
            s.set_operational(c);
            f = self.functionality(&s)?;
        }
        Ok((lor, genome.len()))
    }
}

fn tournament<'p, R: Rng>(pop: &'p [Vec<usize>], fit: &[f64], k: usize, rng: &mut R) -> &'p [usize] {
    let mut best = rng.gen_range(0..pop.len());
    for _ in 1..k {
        let i = rng.gen_range(0..pop.len());
        if fit[i] < fit[best] {
            best = i;
        }
    }
    &pop[best]
}

/// Order crossover: a slice of `a` kept in place, the rest filled in `b`'s order.
pub fn order_crossover<R: Rng + ?Sized>(a: &[usize], b: &[usize], rng: &mut R) -> Vec<usize> {
    let n = a.len();
    if n < 2 {
        return a.to_vec();
    }
    let (mut i, mut j) = (rng.gen_range(0..n), rng.gen_range(0..n));
    if i > j {
        std::mem::swap(&mut i, &mut j);
    }
    let kept = &a[i..=j];
    let mut fill = b.iter().filter(|g| !kept.contains(g));
    (0..n)
        .map(|p| if (i..=j).contains(&p) { a[p] } else { *fill.next().expect("permutation") })
        .collect()
}

pub fn swap_mutation<R: Rng + ?Sized>(g: &mut [usize], rng: &mut R) {
    if g.len() >= 2 {
        let i = rng.gen_range(0..g.len());
        let j = rng.gen_range(0..g.len());
        g.swap(i, j);
    }
}

/// Genetic search over permutations of the damaged components.
pub fn ga_optimize(system: &System, scenario: &DamageScenario, cfg: &GaConfig) -> Result<GaOutcome> {
    cfg.validate()?;
    system.spec().check_state(&scenario.initial_state)?;
    let damaged = scenario.damaged();
    if damaged.is_empty() {
        return input_err("scenario has no damaged component");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut fitness = Fitness { system, initial: &scenario.initial_state, cache: HashMap::new() };

    let mut pop: Vec<Vec<usize>> = (0..cfg.population_size)
        .map(|_| {
            let mut g = damaged.clone();
            g.shuffle(&mut rng);
            g
        })
        .collect();
    let mut scored = pop.iter().map(|g| fitness.lor(g)).collect::<Result<Vec<_>>>()?;
    let mut fit: Vec<f64> = scored.iter().map(|s| s.0).collect();

    let argmin = |fit: &[f64]| (0..fit.len()).min_by(|&a, &b| fit[a].total_cmp(&fit[b]).then(a.cmp(&b))).expect("nonempty");
    let b = argmin(&fit);
    let mut best = (fit[b], pop[b][..scored[b].1].to_vec());
    let mut history = vec![best.0];

    for _ in 0..cfg.generations {
        let mut ranked: Vec<usize> = (0..pop.len()).collect();
        ranked.sort_by(|&a, &b| fit[a].total_cmp(&fit[b]).then(a.cmp(&b)));
        let mut next: Vec<Vec<usize>> = ranked[..cfg.elite_count].iter().map(|&i| pop[i].clone()).collect();
        while next.len() < cfg.population_size {
            let p1 = tournament(&pop, &fit, cfg.tournament_size, &mut rng);
            let p2 = tournament(&pop, &fit, cfg.tournament_size, &mut rng);
            let mut child = if rng.gen::<f64>() < cfg.crossover_rate {
                order_crossover(p1, p2, &mut rng)
            } else {
                p1.to_vec()
            };
            if rng.gen::<f64>() < cfg.mutation_rate {
                swap_mutation(&mut child, &mut rng);
            }
            next.push(child);
        }
        pop = next;
        scored = pop.iter().map(|g| fitness.lor(g)).collect::<Result<Vec<_>>>()?;
        fit = scored.iter().map(|s| s.0).collect();
        let b = argmin(&fit);
        if fit[b] < best.0 {
            best = (fit[b], pop[b][..scored[b].1].to_vec());
        }
        history.push(best.0);
    }

    let curve = curve_of(system, scenario, &best.1)?;
    Ok(GaOutcome { best: SequenceSolution { order: best.1, lor: best.0, curve }, history })
}
