//! Reference optimizers: exhaustive enumeration and a genetic algorithm.

mod enumerate;
mod ga;

pub use enumerate::{enumerate_optimal, Enumeration, SequenceSolution, DEFAULT_MAX_ENUM};
pub use ga::{ga_optimize, order_crossover, swap_mutation, GaConfig, GaOutcome};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{order_lor, DamageScenario};
    use crate::fixtures::{load_fixture, Fixture};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn mimo_fig7d_optimum() {
        let fx = Fixture::load("mimo").unwrap();
        let e = enumerate_optimal(&fx.system, &fx.scenario("fig7d").unwrap(), DEFAULT_MAX_ENUM).unwrap();
        assert_eq!(e.optimal_orders, vec![vec![3, 1, 4], vec![3, 4, 1]]);
        assert_eq!(e.best.lor, 180.0);
    }

    #[test]
    fn single_damage_is_one_sequence() {
        let sys = load_fixture("mimo").unwrap();
        let sc = DamageScenario::from_damaged("one", 5, &[2]).unwrap();
        let e = enumerate_optimal(&sys, &sc, DEFAULT_MAX_ENUM).unwrap();
        assert_eq!(e.sequences, 1);
        assert_eq!(e.best.lor, 100.0);
        assert_eq!(e.curves.len(), 1);
    }

    #[test]
    fn no_damage_scores_zero() {
        let sys = load_fixture("mimo").unwrap();
        let e = enumerate_optimal(&sys, &DamageScenario::no_damage(5), 9).unwrap();
        assert_eq!(e.best.lor, 0.0);
        assert!(e.best.order.is_empty());
    }

    #[test]
    fn refuses_beyond_limit() {
        let sys = load_fixture("substation").unwrap();
        let err = enumerate_optimal(&sys, &DamageScenario::worst_case(43), 9).unwrap_err();
        assert!(matches!(err, crate::Error::Complexity { damaged: 43, limit: 9 }));
    }

    #[test]
    fn enumeration_lor_matches_replay() {
        let sys = load_fixture("mimo").unwrap();
        let e = enumerate_optimal(&sys, &DamageScenario::worst_case(5), 9).unwrap();
        for o in &e.optimal_orders {
            assert_eq!(order_lor(&sys, &DamageScenario::worst_case(5).initial_state, o).unwrap().0, e.best.lor);
        }
        assert_eq!(crate::env::compute_lor(&e.best.curve).unwrap(), e.best.lor);
    }

    #[test]
    fn crossover_and_mutation_keep_permutations() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a: Vec<usize> = (0..12).collect();
        let mut b = a.clone();
        b.reverse();
        for _ in 0..500 {
            let mut c = order_crossover(&a, &b, &mut rng);
            swap_mutation(&mut c, &mut rng);
            let mut s = c.clone();
            s.sort_unstable();
            assert_eq!(s, a);
        }
    }

    #[test]
    fn ga_history_never_rises_and_is_seeded() {
        let sys = load_fixture("mimo").unwrap();
        let sc = DamageScenario::worst_case(5);
        let cfg = GaConfig { population_size: 20, generations: 30, ..GaConfig::with_seed(4) };
        let r = ga_optimize(&sys, &sc, &cfg).unwrap();
        assert!(r.history.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(r, ga_optimize(&sys, &sc, &cfg).unwrap());
    }

    #[test]
    fn frozen_population_keeps_initial_best() {
        let sys = load_fixture("mimo").unwrap();
        let sc = DamageScenario::worst_case(5);
        let cfg = GaConfig {
            population_size: 6,
            generations: 15,
            crossover_rate: 0.0,
            mutation_rate: 0.0,
            elite_count: 6,
            ..GaConfig::with_seed(2)
        };
        let r = ga_optimize(&sys, &sc, &cfg).unwrap();
        assert!(r.history.iter().all(|&h| h == r.history[0]));
    }

    #[test]
    fn degenerate_configs_rejected() {
        let sys = load_fixture("mimo").unwrap();
        let sc = DamageScenario::worst_case(5);
        for cfg in [
            GaConfig { population_size: 0, ..GaConfig::default() },
            GaConfig { tournament_size: 0, ..GaConfig::default() },
            GaConfig { elite_count: 101, ..GaConfig::default() },
            GaConfig { mutation_rate: 1.5, ..GaConfig::default() },
        ] {
            assert!(ga_optimize(&sys, &sc, &cfg).is_err());
        }
        assert!(ga_optimize(&sys, &DamageScenario::no_damage(5), &GaConfig::default()).is_err());
    }
}
