use std::collections::BTreeSet;

use crate::env::{DamageScenario, ResilienceCurve};
use crate::error::{Error, Result};
use crate::functionality::System;

pub const DEFAULT_MAX_ENUM: usize = 9;

/// A repair order (truncated at full recovery) with its outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceSolution {
    pub order: Vec<usize>,
    pub lor: f64,
    pub curve: ResilienceCurve,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Enumeration {
    pub best: SequenceSolution,
    /// Every order attaining the minimum, in lexicographic order.
    pub optimal_orders: Vec<Vec<usize>>,
    /// Distinct curves, deduplicated by breakpoints.
    pub curves: Vec<ResilienceCurve>,
    /// Number of truncated orders evaluated.
    pub sequences: usize,
}

/// Equality slack for LoR ties, relative to the optimum.
fn tie_tolerance(best: f64) -> f64 {
    if !best.is_finite() {
        return 0.0;
    }
    1e-9 * best.abs().max(1.0)
}

struct Search<'a> {
    damaged: &'a [usize],
    durations: Vec<f64>,
    /// Functionality per subset of repaired damaged components.
    f_of: Vec<f64>,
    f0: f64,
    best_lor: f64,
    optimal: Vec<Vec<usize>>,
    curves: BTreeSet<Vec<(u64, u64)>>,
    sequences: usize,
    path: Vec<usize>,
    points: Vec<(f64, f64)>,
}

impl Search<'_> {
    fn dfs(&mut self, repaired: usize, time: f64, lor: f64) {
        let f = self.f_of[repaired];
        for k in 0..self.damaged.len() {
            if repaired & (1 << k) != 0 {
                continue;
            }
            let dt = self.durations[k];
            let next = repaired | (1 << k);
            let lor = lor + (self.f0 - f) * dt;
            let t = time + dt;
            self.path.push(k);
            self.points.push((t, self.f_of[next]));
            if self.f_of[next] >= self.f0 {
                self.leaf(lor);
            } else {
                self.dfs(next, t, lor);
            }
            self.points.pop();
            self.path.pop();
        }
    }

    fn leaf(&mut self, lor: f64) {
        self.sequences += 1;
        self.curves
            .insert(self.points.iter().map(|(t, f)| (t.to_bits(), f.to_bits())).collect());
        let order: Vec<usize> = self.path.iter().map(|&k| self.damaged[k]).collect();
        if lor < self.best_lor - tie_tolerance(self.best_lor) {
            self.best_lor = lor;
            self.optimal = vec![order];
        } else if (lor - self.best_lor).abs() <= tie_tolerance(self.best_lor) {
            self.optimal.push(order);
        }
    }
}

/// Exhaustive search over repair orders of the damaged components.
///
/// Each order stops as soon as functionality is restored, so orders sharing
/// a restoring prefix count once.
pub fn enumerate_optimal(system: &System, scenario: &DamageScenario, max_damaged: usize) -> Result<Enumeration> {
    system.spec().check_state(&scenario.initial_state)?;
    let damaged = scenario.damaged();
    let m = damaged.len();
    if m > max_damaged {
        return Err(Error::Complexity { damaged: m, limit: max_damaged });
    }
    if m >= usize::BITS as usize - 1 {
        return Err(Error::Complexity { damaged: m, limit: usize::BITS as usize - 2 });
    }
    let f0 = system.f0();
    let f_of = (0..1usize << m)
        .map(|mask| {
            let mut s = scenario.initial_state.clone();
            for (k, &c) in damaged.iter().enumerate() {
                if mask & (1 << k) != 0 {
                    s.set_operational(c);
                }
            }
            system.functionality(&s)
        })
        .collect::<Result<Vec<_>>>()?;
    let fd = f_of[0];
    let mut search = Search {
        damaged: &damaged,
        durations: damaged.iter().map(|&c| system.spec().repair_duration(c)).collect(),
        f_of,
        f0,
        best_lor: f64::INFINITY,
        optimal: Vec::new(),
        curves: BTreeSet::new(),
        sequences: 0,
        path: Vec::new(),
        points: vec![(0.0, fd)],
    };
    if fd >= f0 {
        search.leaf(0.0);
    } else {
        search.dfs(0, 0.0, 0.0);
    }
    let mut optimal = search.optimal;
    optimal.sort();
    let order = optimal[0].clone();
    let curve = curve_of(system, scenario, &order)?;
    let curves = search
        .curves
        .into_iter()
        .map(|pts| {
            let pts = pts.into_iter().map(|(t, f)| (f64::from_bits(t), f64::from_bits(f))).collect();
            ResilienceCurve::from_points(f0, pts)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Enumeration {
        best: SequenceSolution { order, lor: search.best_lor, curve },
        optimal_orders: optimal,
        curves,
        sequences: search.sequences,
    })
}

pub(crate) fn curve_of(system: &System, scenario: &DamageScenario, order: &[usize]) -> Result<ResilienceCurve> {
    Ok(crate::env::replay(system, scenario, order)?.curve)
}
