use std::collections::VecDeque;

use rand::seq::index::sample;
use rand::Rng;

use crate::graph::StateVector;

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: StateVector,
    pub action: usize,
    pub reward: f64,
    pub next_state: StateVector,
    pub done: bool,
}

/// Fixed-capacity FIFO experience memory.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    items: VecDeque<Transition>,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self { capacity, items: VecDeque::with_capacity(capacity.min(1 << 16)) }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn push(&mut self, t: Transition) {
        if self.items.len() == self.capacity {
            self.items.pop_front();
        }
        self.items.push_back(t);
    }

    /// `n` distinct stored transitions, uniformly at random.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<&Transition> {
        let n = n.min(self.items.len());
        sample(rng, self.items.len(), n).into_iter().map(|i| &self.items[i]).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        self.items.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn t(reward: f64) -> Transition {
        Transition {
            state: StateVector::all_damaged(2),
            action: 0,
            reward,
            next_state: StateVector::from_bits(&[1, 0]).unwrap(),
            done: false,
        }
    }

    #[test]
    fn evicts_oldest() {
        let mut b = ReplayBuffer::new(3);
        for r in 0..5 {
            b.push(t(r as f64));
        }
        assert_eq!(b.len(), 3);
        let rewards: Vec<f64> = b.iter().map(|t| t.reward).collect();
        assert_eq!(rewards, vec![2.0, 3.0, 4.0]);
    }

    #[test]
    fn samples_are_distinct_and_stored() {
        let mut b = ReplayBuffer::new(100);
        for r in 0..50 {
            b.push(t(r as f64));
        }
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let s = b.sample(&mut rng, 20);
        let mut rewards: Vec<i64> = s.iter().map(|t| t.reward as i64).collect();
        rewards.sort_unstable();
        rewards.dedup();
        assert_eq!(rewards.len(), 20);
        assert!(rewards.iter().all(|r| (0..50).contains(r)));
    }
}
