//! Post-disaster recovery as a deterministic episodic MDP.
//!
//! The state is the component state vector, an action repairs one or more
//! damaged components, and the reward is the functionality gained per day of
//! repair work. Because every repair's reward is its gain divided by its
//! duration, the reward integrated over an episode telescopes to
//! `F0 - F_d`; maximizing early reward is what shrinks the area between
//! the resilience curve and `F0` (the lack of resilience, LoR).

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{input_err, Error, Result};
use crate::functionality::System;
use crate::graph::StateVector;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DamageScenario {
    pub label: String,
    pub initial_state: StateVector,
}

impl DamageScenario {
    pub fn new(label: impl Into<String>, initial_state: StateVector) -> Self {
        Self { label: label.into(), initial_state }
    }

    pub fn worst_case(n: usize) -> Self {
        Self::new("worst-case", StateVector::all_damaged(n))
    }

    pub fn no_damage(n: usize) -> Self {
        Self::new("no-damage", StateVector::all_operational(n))
    }

    pub fn from_damaged(label: impl Into<String>, n: usize, damaged: &[usize]) -> Result<Self> {
        Ok(Self::new(label, StateVector::with_damaged(n, damaged)?))
    }

    pub fn damaged(&self) -> Vec<usize> {
        self.initial_state.damaged().collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioKind {
    WorstCase,
    RandomK(usize),
}

/// Draws a scenario reproducibly from `seed`.
pub fn sample_scenario(n: usize, kind: ScenarioKind, seed: u64) -> Result<DamageScenario> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = sample_scenario_with(n, kind, &mut rng)?;
    if let ScenarioKind::RandomK(k) = kind {
        s.label = format!("random-k{k}-seed{seed}");
    }
    Ok(s)
}

/// Draws a scenario from a caller-owned generator.
pub fn sample_scenario_with<R: Rng + ?Sized>(
    n: usize,
    kind: ScenarioKind,
    rng: &mut R,
) -> Result<DamageScenario> {
    match kind {
        ScenarioKind::WorstCase => Ok(DamageScenario::worst_case(n)),
        ScenarioKind::RandomK(k) => {
            if k == 0 || k > n {
                return input_err(format!("random scenario needs 0 < k <= {n}, got {k}"));
            }
            let damaged = sample(rng, n, k).into_vec();
            DamageScenario::from_damaged(format!("random-k{k}"), n, &damaged)
        }
    }
}

/// Step-function trajectory of functionality over repair time.
///
/// Point `(t_i, F_i)` means functionality is `F_i` from `t_i` until the next
/// point's time.
#[derive(Debug, Clone, PartialEq)]
pub struct ResilienceCurve {
    points: Vec<(f64, f64)>,
    f0: f64,
}

impl ResilienceCurve {
    pub fn new(f0: f64, initial: f64) -> Self {
        Self { points: vec![(0.0, initial)], f0 }
    }

    /// Builds from raw breakpoints, checking ordering and monotonicity.
    pub fn from_points(f0: f64, points: Vec<(f64, f64)>) -> Result<Self> {
        if points.first().map(|p| p.0) != Some(0.0) {
            return input_err("curve must start at t = 0");
        }
        for w in points.windows(2) {
            if w[1].0 <= w[0].0 {
                return input_err("curve times must strictly increase");
            }
            if w[1].1 < w[0].1 {
                return input_err("curve functionality must not decrease");
            }
        }
        Ok(Self { points, f0 })
    }

    fn push(&mut self, time: f64, functionality: f64) {
        self.points.push((time, functionality));
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn f0(&self) -> f64 {
        self.f0
    }

    pub fn initial(&self) -> f64 {
        self.points[0].1
    }

    pub fn final_value(&self) -> f64 {
        self.points[self.points.len() - 1].1
    }

    pub fn end_time(&self) -> f64 {
        self.points[self.points.len() - 1].0
    }

    pub fn is_complete(&self) -> bool {
        self.final_value() >= self.f0
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["time", "functionality"])?;
        for (t, f) in &self.points {
            w.write_record([t.to_string(), f.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Lack of resilience: exact integral of `F0 - F(t)` over the staircase.
pub fn compute_lor(curve: &ResilienceCurve) -> Result<f64> {
    if !curve.is_complete() {
        return Err(Error::Contract(format!(
            "curve ends at {} below F0 = {}",
            curve.final_value(),
            curve.f0
        )));
    }
    Ok(staircase_area(curve.f0, &curve.points))
}

fn staircase_area(f0: f64, points: &[(f64, f64)]) -> f64 {
    points.windows(2).map(|w| (f0 - w[0].1) * (w[1].0 - w[0].0)).sum()
}

/// Outcome of a completed (or replayed) recovery episode.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRecord {
    pub curve: ResilienceCurve,
    pub repair_sequence: Vec<usize>,
    pub rewards: Vec<f64>,
    pub return_discounted: f64,
    pub lor: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub next_state: StateVector,
    /// Functionality gained per day, MW/day.
    pub reward: f64,
    /// Duration of the step in days.
    pub elapsed: f64,
    pub done: bool,
}

/// Component ids that may still be repaired: exactly the damaged ones.
pub fn valid_actions(state: &StateVector) -> Vec<usize> {
    state.damaged().collect()
}

/// Single-owner environment over a borrowed system.
#[derive(Debug, Clone)]
pub struct RecoveryEnv<'a> {
    system: &'a System,
    resource_units: usize,
    gamma: f64,
    state: StateVector,
    functionality: f64,
    time: f64,
    curve: ResilienceCurve,
    sequence: Vec<usize>,
    rewards: Vec<f64>,
    rejected: usize,
}

impl<'a> RecoveryEnv<'a> {
    /// A fresh environment in the worst-case state.
    pub fn new(system: &'a System) -> Self {
        let n = system.component_count();
        let mut env = Self {
            system,
            resource_units: 1,
            gamma: 0.95,
            state: StateVector::all_damaged(n),
            functionality: 0.0,
            time: 0.0,
            curve: ResilienceCurve::new(system.f0(), 0.0),
            sequence: Vec::new(),
            rewards: Vec::new(),
            rejected: 0,
        };
        env.reset(&DamageScenario::worst_case(n)).expect("worst case is always valid");
        env
    }

    pub fn with_resource_units(mut self, u: usize) -> Result<Self> {
        if u == 0 {
            return input_err("at least one resource unit is required");
        }
        self.resource_units = u;
        Ok(self)
    }

    /// Discount used for the recorded return.
    pub fn with_discount(mut self, gamma: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return input_err(format!("discount must lie in [0, 1], got {gamma}"));
        }
        self.gamma = gamma;
        Ok(self)
    }

    pub fn system(&self) -> &'a System {
        self.system
    }

    pub fn resource_units(&self) -> usize {
        self.resource_units
    }

    pub fn reset(&mut self, scenario: &DamageScenario) -> Result<&StateVector> {
        self.system.spec().check_state(&scenario.initial_state)?;
        let f = self.system.functionality(&scenario.initial_state)?;
        self.state = scenario.initial_state.clone();
        self.functionality = f;
        self.time = 0.0;
        self.curve = ResilienceCurve::new(self.system.f0(), f);
        self.sequence.clear();
        self.rewards.clear();
        Ok(&self.state)
    }

    pub fn state(&self) -> &StateVector {
        &self.state
    }

    pub fn functionality(&self) -> f64 {
        self.functionality
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn done(&self) -> bool {
        self.functionality >= self.system.f0()
    }

    pub fn valid_actions(&self) -> Vec<usize> {
        valid_actions(&self.state)
    }

    /// Number of actions refused because they targeted intact or repeated components.
    pub fn rejected_actions(&self) -> usize {
        self.rejected
    }

    /// Repairs `actions` concurrently; the step lasts as long as the slowest repair.
    pub fn step(&mut self, actions: &[usize]) -> Result<StepOutcome> {
        if self.done() {
            return Err(Error::Contract("episode already finished".into()));
        }
        if actions.is_empty() {
            return Err(Error::Contract("a step must repair at least one component".into()));
        }
        if actions.len() > self.resource_units {
            return Err(Error::Resource {
                requested: actions.len(),
                available: self.resource_units,
            });
        }
        let n = self.state.len();
        let mut seen = vec![false; n];
        for &a in actions {
            if a >= n || self.state.is_operational(a) || seen[a] {
                self.rejected += 1;
                return Err(Error::Contract(format!(
                    "component {a} is not a damaged, unselected component"
                )));
            }
            seen[a] = true;
        }

        let spec = self.system.spec();
        let elapsed = actions.iter().map(|&a| spec.repair_duration(a)).fold(0.0, f64::max);
        for &a in actions {
            self.state.set_operational(a);
        }
        let next_f = self.system.functionality(&self.state)?;
        let reward = (next_f - self.functionality) / elapsed;
        self.time += elapsed;
        self.functionality = next_f;
        self.curve.push(self.time, next_f);
        let mut ordered = actions.to_vec();
        ordered.sort_unstable();
        self.sequence.extend(ordered);
        self.rewards.push(reward);
        Ok(StepOutcome { next_state: self.state.clone(), reward, elapsed, done: self.done() })
    }

    pub fn curve(&self) -> &ResilienceCurve {
        &self.curve
    }

    pub fn repair_sequence(&self) -> &[usize] {
        &self.sequence
    }

    /// Record of the finished episode; fails if recovery is incomplete.
    pub fn record(&self) -> Result<EpisodeRecord> {
        let lor = compute_lor(&self.curve)?;
        let return_discounted = self
            .rewards
            .iter()
            .rev()
            .fold(0.0, |acc, r| r + self.gamma * acc);
        Ok(EpisodeRecord {
            curve: self.curve.clone(),
            repair_sequence: self.sequence.clone(),
            rewards: self.rewards.clone(),
            return_discounted,
            lor,
        })
    }
}

/// Replays a single-repair order from `scenario`, stopping once functionality
/// is restored. Entries past that point are ignored.
pub fn replay(system: &System, scenario: &DamageScenario, order: &[usize]) -> Result<EpisodeRecord> {
    let mut env = RecoveryEnv::new(system);
    env.reset(scenario)?;
    for &a in order {
        if env.done() {
            break;
        }
        env.step(&[a])?;
    }
    env.record()
}

/// LoR of a single-repair order and the length of the prefix actually used.
///
/// Allocation-light path for optimizers that evaluate many orders; agrees
/// with [`replay`] exactly.
pub fn order_lor(system: &System, initial: &StateVector, order: &[usize]) -> Result<(f64, usize)> {
    let f0 = system.f0();
    let mut state = initial.clone();
    let mut f = system.functionality(&state)?;
    let mut lor = 0.0;
    for (used, &a) in order.iter().enumerate() {
        if f >= f0 {
            return Ok((lor, used));
        }
        if state.is_operational(a) {
            return Err(Error::Contract(format!("component {a} is not damaged")));
        }
        let dt = system.spec().repair_duration(a);
        lor += (f0 - f) * dt;
        state.set_operational(a);
        f = system.functionality(&state)?;
    }
    if f < f0 {
        return Err(Error::Contract("order ends before functionality is restored".into()));
    }
    Ok((lor, order.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::load_fixture;

    fn mimo() -> System {
        load_fixture("mimo").unwrap()
    }

    #[test]
    fn worst_case_reset() {
        let sys = mimo();
        let env = RecoveryEnv::new(&sys);
        assert_eq!(env.state(), &StateVector::all_damaged(5));
        assert_eq!(env.functionality(), 0.0);
        assert_eq!(env.time(), 0.0);
    }

    #[test]
    fn no_damage_is_terminal_with_zero_lor() {
        let sys = mimo();
        let mut env = RecoveryEnv::new(&sys);
        env.reset(&DamageScenario::no_damage(5)).unwrap();
        assert!(env.done());
        assert_eq!(env.record().unwrap().lor, 0.0);
        assert!(env.step(&[0]).is_err());
    }

    #[test]
    fn fig7d_state_and_actions() {
        // components {E2, E4, E5} damaged, 1-based
        let s = DamageScenario::from_damaged("fig7d", 5, &[1, 3, 4]).unwrap();
        assert_eq!(s.initial_state.bits(), vec![1, 0, 1, 0, 0]);
        let acts: Vec<_> = valid_actions(&s.initial_state).iter().map(|a| a + 1).collect();
        assert_eq!(acts, vec![2, 4, 5]);
        assert!(valid_actions(&StateVector::all_operational(5)).is_empty());
        assert_eq!(valid_actions(&StateVector::all_damaged(5)), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn step_rejects_invalid_actions() {
        let sys = mimo();
        let mut env = RecoveryEnv::new(&sys);
        env.reset(&DamageScenario::from_damaged("d", 5, &[1, 3, 4]).unwrap()).unwrap();
        assert!(matches!(env.step(&[0]), Err(Error::Contract(_))));
        assert!(matches!(env.step(&[1, 3]), Err(Error::Resource { .. })));
        assert!(matches!(env.step(&[]), Err(Error::Contract(_))));
        assert_eq!(env.rejected_actions(), 1);

        let mut env = RecoveryEnv::new(&sys).with_resource_units(2).unwrap();
        assert!(matches!(env.step(&[1, 1]), Err(Error::Contract(_))));
        assert!(env.step(&[1, 3]).is_ok());
    }

    #[test]
    fn redundant_repair_has_zero_reward() {
        let sys = mimo();
        let mut env = RecoveryEnv::new(&sys);
        env.reset(&DamageScenario::from_damaged("d", 5, &[1, 3, 4]).unwrap()).unwrap();
        let out = env.step(&[1]).unwrap();
        assert_eq!(out.reward, 0.0);
        assert_eq!(out.elapsed, 1.0);
        assert!(!out.done);
    }

    #[test]
    fn hand_computed_lor() {
        let c = ResilienceCurve::from_points(100.0, vec![(0.0, 0.0), (1.0, 50.0), (2.0, 100.0)])
            .unwrap();
        assert_eq!(compute_lor(&c).unwrap(), 150.0);
        assert_eq!(compute_lor(&ResilienceCurve::new(100.0, 100.0)).unwrap(), 0.0);
        let partial = ResilienceCurve::from_points(100.0, vec![(0.0, 0.0), (1.0, 50.0)]).unwrap();
        assert!(matches!(compute_lor(&partial), Err(Error::Contract(_))));
    }

    #[test]
    fn curve_shape_checked() {
        assert!(ResilienceCurve::from_points(1.0, vec![(1.0, 0.0)]).is_err());
        assert!(ResilienceCurve::from_points(1.0, vec![(0.0, 0.5), (1.0, 0.2)]).is_err());
        assert!(ResilienceCurve::from_points(1.0, vec![(0.0, 0.5), (0.0, 1.0)]).is_err());
    }

    #[test]
    fn multi_repair_takes_the_longest_duration() {
        use crate::functionality::FunctionalityModel;
        use crate::graph::SystemSpec;
        let base = mimo();
        let s = base.spec();
        let spec = SystemSpec::new(
            "mimo-dur",
            s.vertex_count(),
            5,
            s.edges().to_vec(),
            s.sources().to_vec(),
            s.loads().to_vec(),
            Some(vec![1.0, 2.0, 3.0, 1.5, 0.5]),
        )
        .unwrap();
        let sys = System::new(spec, FunctionalityModel::clone(base.model())).unwrap();
        let mut env = RecoveryEnv::new(&sys).with_resource_units(2).unwrap();
        let out = env.step(&[0, 2]).unwrap();
        assert_eq!(out.elapsed, 3.0);
        assert_eq!(env.time(), 3.0);
    }

    #[test]
    fn random_scenarios() {
        let a = sample_scenario(43, ScenarioKind::RandomK(8), 11).unwrap();
        let b = sample_scenario(43, ScenarioKind::RandomK(8), 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.initial_state.damaged_count(), 8);
        assert!(sample_scenario(43, ScenarioKind::RandomK(0), 1).is_err());
        assert!(sample_scenario(43, ScenarioKind::RandomK(44), 1).is_err());
        let w = sample_scenario(43, ScenarioKind::WorstCase, 1).unwrap();
        assert_eq!(w.initial_state.damaged_count(), 43);
    }

    #[test]
    fn order_lor_matches_replay() {
        let sys = mimo();
        let sc = DamageScenario::worst_case(5);
        let order = [3, 0, 2, 4, 1];
        let (lor, used) = order_lor(&sys, &sc.initial_state, &order).unwrap();
        let rec = replay(&sys, &sc, &order).unwrap();
        assert_eq!(lor, rec.lor);
        assert_eq!(used, rec.repair_sequence.len());
    }

    #[test]
    fn discounted_return() {
        let sys = mimo();
        let mut env = RecoveryEnv::new(&sys).with_discount(0.5).unwrap();
        for a in [0, 2, 3, 4, 1] {
            if !env.done() {
                env.step(&[a]).unwrap();
            }
        }
        let rec = env.record().unwrap();
        let expect: f64 =
            rec.rewards.iter().enumerate().map(|(k, r)| 0.5f64.powi(k as i32) * r).sum();
        assert!((rec.return_discounted - expect).abs() < 1e-12);
    }
}
