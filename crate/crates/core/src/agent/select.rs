use rand::Rng;

use crate::error::{input_err, Result};

/// Rule for turning Q-values into a set of repairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionRule {
    /// Uniform over valid actions.
    Random,
    /// Highest Q first; ties go to the lower index.
    Greedy,
    /// Sampled with probability proportional to (shifted) Q.
    Roulette,
}

/// Offset added after shifting so the smallest valid Q keeps nonzero mass.
pub const ROULETTE_FLOOR: f64 = 1e-6;

/// Picks `min(u, #valid)` distinct actions with `mask[i]` true.
///
/// Masked entries are never returned whatever their Q-value.
pub fn select_actions<R: Rng + ?Sized>(
    q_values: &[f64],
    mask: &[bool],
    u: usize,
    rule: SelectionRule,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if q_values.len() != mask.len() {
        return input_err(format!("{} Q-values for a mask of {}", q_values.len(), mask.len()));
    }
    let mut valid: Vec<usize> = (0..mask.len()).filter(|&i| mask[i]).collect();
    if valid.is_empty() {
        return input_err("no valid action to select");
    }
    let take = u.min(valid.len());
    if rule != SelectionRule::Random {
        if let Some(&i) = valid.iter().find(|&&i| q_values[i].is_nan()) {
            return input_err(format!("Q-value of action {i} is NaN"));
        }
    }
    match rule {
        SelectionRule::Random => {
            let picked = rand::seq::index::sample(rng, valid.len(), take);
            Ok(picked.into_iter().map(|k| valid[k]).collect())
        }
        SelectionRule::Greedy => {
            valid.sort_by(|&a, &b| q_values[b].total_cmp(&q_values[a]).then(a.cmp(&b)));
            valid.truncate(take);
            Ok(valid)
        }
        SelectionRule::Roulette => {
            let mut picked = Vec::with_capacity(take);
            for _ in 0..take {
                let w = roulette_weights(&valid.iter().map(|&i| q_values[i]).collect::<Vec<_>>());
                let k = spin(&w, rng);
                picked.push(valid.remove(k));
            }
            Ok(picked)
        }
    }
}

/// Selection weights for the valid Q-values.
///
/// Raw Q is used when it is a usable distribution (finite, nonnegative,
/// positive sum); otherwise every value is shifted by `-min + ROULETTE_FLOOR`.
pub fn roulette_weights(q: &[f64]) -> Vec<f64> {
    let finite = q.iter().all(|v| v.is_finite());
    let sum: f64 = q.iter().sum();
    if finite && q.iter().all(|&v| v >= 0.0) && sum > 0.0 && sum.is_finite() {
        return q.to_vec();
    }
    let clean: Vec<f64> = q.iter().map(|&v| if v.is_finite() { v } else { f64::MIN }).collect();
    let lo = clean.iter().copied().filter(|v| *v > f64::MIN).fold(f64::INFINITY, f64::min);
    if !lo.is_finite() {
        return vec![1.0; q.len()];
    }
    clean
        .iter()
        .map(|&v| if v == f64::MIN { 0.0 } else { v - lo + ROULETTE_FLOOR })
        .collect()
}

/// Index of the first cumulative weight reaching `r * total`, `r ~ U[0, 1)`.
fn spin<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let target = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if acc > target && *w > 0.0 {
            return i;
        }
    }
    weights.iter().rposition(|w| *w > 0.0).unwrap_or(weights.len() - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const NEG: f64 = f64::NEG_INFINITY;

    #[test]
    fn greedy_respects_mask() {
        let q = [NEG, 2.0, NEG, 5.0, 3.0];
        let mask = [false, true, false, true, true];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(select_actions(&q, &mask, 1, SelectionRule::Greedy, &mut rng).unwrap(), vec![3]);
        assert_eq!(select_actions(&q, &mask, 2, SelectionRule::Greedy, &mut rng).unwrap(), vec![3, 4]);
        assert_eq!(
            select_actions(&q, &mask, 9, SelectionRule::Greedy, &mut rng).unwrap(),
            vec![3, 4, 1]
        );
    }

    #[test]
    fn masked_entry_with_large_q_is_skipped() {
        let q = [100.0, 2.0, 1.0];
        let mask = [false, true, true];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for rule in [SelectionRule::Greedy, SelectionRule::Roulette, SelectionRule::Random] {
            for _ in 0..200 {
                let a = select_actions(&q, &mask, 1, rule, &mut rng).unwrap();
                assert_ne!(a[0], 0);
            }
        }
    }

    #[test]
    fn greedy_ties_take_lower_index() {
        let q = [1.0, 4.0, 4.0, 4.0];
        let mask = [true, false, true, true];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(select_actions(&q, &mask, 1, SelectionRule::Greedy, &mut rng).unwrap(), vec![2]);
    }

    #[test]
    fn roulette_frequencies_follow_weights() {
        let q = [1.0, 3.0, 0.0, 6.0];
        let mask = [true, true, false, true];
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut counts = [0usize; 4];
        let trials = 40_000;
        for _ in 0..trials {
            counts[select_actions(&q, &mask, 1, SelectionRule::Roulette, &mut rng).unwrap()[0]] += 1;
        }
        assert_eq!(counts[2], 0);
        for (i, p) in [(0, 0.1), (1, 0.3), (3, 0.6)] {
            let f = counts[i] as f64 / trials as f64;
            assert!((f - p).abs() < 0.01, "action {i}: {f} vs {p}");
        }
    }

    #[test]
    fn roulette_shifts_negative_values() {
        let w = roulette_weights(&[-3.0, -1.0, 1.0]);
        assert!((w[0] - ROULETTE_FLOOR).abs() < 1e-15);
        assert!((w[1] - (2.0 + ROULETTE_FLOOR)).abs() < 1e-12);
        assert!((w[2] - (4.0 + ROULETTE_FLOOR)).abs() < 1e-12);
        assert_eq!(roulette_weights(&[2.0, 0.0]), vec![2.0, 0.0]);
        let w = roulette_weights(&[0.0, 0.0]);
        assert!(w.iter().all(|v| *v > 0.0));
    }

    #[test]
    fn multi_unit_roulette_is_distinct() {
        let q = [1.0, 1.0, 1.0, 1.0, 1.0];
        let mask = [true; 5];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let mut a = select_actions(&q, &mask, 3, SelectionRule::Roulette, &mut rng).unwrap();
            a.sort_unstable();
            a.dedup();
            assert_eq!(a.len(), 3);
        }
    }

    #[test]
    fn empty_mask_and_nan_are_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(select_actions(&[1.0], &[false], 1, SelectionRule::Greedy, &mut rng).is_err());
        assert!(select_actions(&[f64::NAN], &[true], 1, SelectionRule::Greedy, &mut rng).is_err());
        assert!(select_actions(&[1.0], &[true, true], 1, SelectionRule::Greedy, &mut rng).is_err());
    }
}
