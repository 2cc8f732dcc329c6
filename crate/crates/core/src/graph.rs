//! Directed-graph system model and reachability under a component state.
//!
//! Components live on edges. A damaged component removes every edge it
//! backs, and the system's connectivity is the transitive closure of what
//! remains. Closure is kept boolean: callers only ever ask whether *some*
//! path of length at least one exists, so the integer path-count powers of
//! the adjacency matrix would only add overflow risk.

use std::collections::BTreeSet;

use crate::error::{input_err, Result};

/// A directed edge `from -> to` backed by one repairable component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub component: usize,
}

/// Topology, terminals, and repair durations of a system. Indices are 0-based.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    name: String,
    vertex_count: usize,
    component_count: usize,
    edges: Vec<Edge>,
    sources: Vec<usize>,
    loads: Vec<usize>,
    repair_durations: Vec<f64>,
}

impl SystemSpec {
    pub fn new(
        name: impl Into<String>,
        vertex_count: usize,
        component_count: usize,
        edges: Vec<Edge>,
        sources: Vec<usize>,
        loads: Vec<usize>,
        repair_durations: Option<Vec<f64>>,
    ) -> Result<Self> {
        if vertex_count == 0 {
            return input_err("vertex_count must be positive");
        }
        if component_count == 0 {
            return input_err("component_count must be positive");
        }
        for e in &edges {
            if e.from >= vertex_count || e.to >= vertex_count {
                return input_err(format!(
                    "edge {}->{} has an endpoint outside 0..{vertex_count}",
                    e.from, e.to
                ));
            }
            if e.component >= component_count {
                return input_err(format!(
                    "edge {}->{} references component {} of {component_count}",
                    e.from, e.to, e.component
                ));
            }
        }
        let sources = dedup_vertices(sources, vertex_count, "source")?;
        let loads = dedup_vertices(loads, vertex_count, "load")?;
        if sources.iter().any(|s| loads.contains(s)) {
            return input_err("source and load vertex sets must be disjoint");
        }
        let repair_durations = repair_durations.unwrap_or_else(|| vec![1.0; component_count]);
        if repair_durations.len() != component_count {
            return input_err(format!(
                "{} repair durations given for {component_count} components",
                repair_durations.len()
            ));
        }
        if let Some(d) = repair_durations.iter().find(|d| !(d.is_finite() && **d > 0.0)) {
            return input_err(format!("repair durations must be positive and finite, got {d}"));
        }
        Ok(Self {
            name: name.into(),
            vertex_count,
            component_count,
            edges,
            sources,
            loads,
            repair_durations,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn component_count(&self) -> usize {
        self.component_count
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn sources(&self) -> &[usize] {
        &self.sources
    }

    pub fn loads(&self) -> &[usize] {
        &self.loads
    }

    pub fn repair_durations(&self) -> &[f64] {
        &self.repair_durations
    }

    pub fn repair_duration(&self, component: usize) -> f64 {
        self.repair_durations[component]
    }

    pub(crate) fn check_state(&self, state: &StateVector) -> Result<()> {
        if state.len() != self.component_count {
            return input_err(format!(
                "state has {} entries, system `{}` has {} components",
                state.len(),
                self.name,
                self.component_count
            ));
        }
        Ok(())
    }
}

fn dedup_vertices(set: Vec<usize>, vertex_count: usize, what: &str) -> Result<Vec<usize>> {
    if set.is_empty() {
        return input_err(format!("{what} vertex set must be nonempty"));
    }
    if let Some(v) = set.iter().find(|v| **v >= vertex_count) {
        return input_err(format!("{what} vertex {v} outside 0..{vertex_count}"));
    }
    Ok(set.into_iter().collect::<BTreeSet<_>>().into_iter().collect())
}

/// Binary operational state per component: `true` operational, `false` damaged.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateVector(Vec<bool>);

impl StateVector {
    pub fn all_operational(n: usize) -> Self {
        Self(vec![true; n])
    }

    pub fn all_damaged(n: usize) -> Self {
        Self(vec![false; n])
    }

    /// Builds a state of length `n` with exactly the listed components damaged.
    pub fn with_damaged(n: usize, damaged: &[usize]) -> Result<Self> {
        let mut states = vec![true; n];
        for &c in damaged {
            if c >= n {
                return input_err(format!("component {c} outside 0..{n}"));
            }
            states[c] = false;
        }
        Ok(Self(states))
    }

    /// Parses 0/1 entries; anything else is rejected.
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        bits.iter()
            .map(|b| match b {
                0 => Ok(false),
                1 => Ok(true),
                other => input_err(format!("state entries must be 0 or 1, got {other}")),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }

    pub fn from_bools(states: Vec<bool>) -> Self {
        Self(states)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_operational(&self, component: usize) -> bool {
        self.0[component]
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    pub fn set_operational(&mut self, component: usize) {
        self.0[component] = true;
    }

    pub fn damaged(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter(|(_, s)| !**s).map(|(i, _)| i)
    }

    pub fn damaged_count(&self) -> usize {
        self.0.iter().filter(|s| !**s).count()
    }

    pub fn bits(&self) -> Vec<u8> {
        self.0.iter().map(|&s| s as u8).collect()
    }

    pub fn to_input(&self) -> Vec<f64> {
        self.0.iter().map(|&s| if s { 1.0 } else { 0.0 }).collect()
    }
}

/// Square boolean matrix stored as packed 64-bit rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitMatrix {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl BitMatrix {
    pub fn new(n: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        Self { n, words, bits: vec![0; n * words] }
    }

    /// Builds from nested rows; every row must have the outer length.
    pub fn from_rows(rows: &[Vec<bool>]) -> Result<Self> {
        let n = rows.len();
        let mut m = Self::new(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return input_err(format!("row {i} has length {}, expected {n}", row.len()));
            }
            for (j, &b) in row.iter().enumerate() {
                if b {
                    m.set(i, j);
                }
            }
        }
        Ok(m)
    }

    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.words + j / 64] >> (j % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize) {
        self.bits[i * self.words + j / 64] |= 1 << (j % 64);
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn to_rows(&self) -> Vec<Vec<bool>> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j)).collect()).collect()
    }
}

/// Adjacency of the state-filtered graph: `(i, j)` is set iff some edge
/// `i -> j` is backed by an operational component.
pub fn build_adjacency(spec: &SystemSpec, state: &StateVector) -> Result<BitMatrix> {
    spec.check_state(state)?;
    let mut adj = BitMatrix::new(spec.vertex_count());
    for e in spec.edges() {
        if state.is_operational(e.component) {
            adj.set(e.from, e.to);
        }
    }
    Ok(adj)
}

/// Path-existence closure of an adjacency matrix (paths of length >= 1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReachabilityMatrix(BitMatrix);

impl ReachabilityMatrix {
    pub fn reachable(&self, from: usize, to: usize) -> bool {
        self.0.get(from, to)
    }

    pub fn size(&self) -> usize {
        self.0.size()
    }

    pub fn as_matrix(&self) -> &BitMatrix {
        &self.0
    }

    /// True iff any vertex of `from_set` reaches `to`.
    pub fn any_reaches(&self, from_set: &[usize], to: usize) -> Result<bool> {
        self.check_set(from_set)?;
        self.check_vertex(to)?;
        Ok(from_set.iter().any(|&s| self.reachable(s, to)))
    }

    /// True iff `from` reaches any vertex of `to_set`.
    pub fn reaches_any(&self, from: usize, to_set: &[usize]) -> Result<bool> {
        self.check_set(to_set)?;
        self.check_vertex(from)?;
        Ok(to_set.iter().any(|&t| self.reachable(from, t)))
    }

    fn check_vertex(&self, v: usize) -> Result<()> {
        if v >= self.size() {
            return input_err(format!("vertex {v} outside 0..{}", self.size()));
        }
        Ok(())
    }

    fn check_set(&self, set: &[usize]) -> Result<()> {
        if set.is_empty() {
            return input_err("vertex set must be nonempty");
        }
        set.iter().try_for_each(|&v| self.check_vertex(v))
    }
}

/// Warshall closure on packed rows.
pub fn reachability(adjacency: &BitMatrix) -> ReachabilityMatrix {
    let mut c = adjacency.clone();
    let (n, w) = (c.n, c.words);
    for k in 0..n {
        for i in 0..n {
            if c.get(i, k) {
                for word in 0..w {
                    let src = c.bits[k * w + word];
                    c.bits[i * w + word] |= src;
                }
            }
        }
    }
    ReachabilityMatrix(c)
}

/// Closure of an already-closed matrix, for chaining.
pub fn close(r: &ReachabilityMatrix) -> ReachabilityMatrix {
    reachability(r.as_matrix())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain3() -> BitMatrix {
        let mut m = BitMatrix::new(3);
        m.set(0, 1);
        m.set(1, 2);
        m
    }

    #[test]
    fn rejects_bad_specs() {
        let e = |f, t, c| Edge { from: f, to: t, component: c };
        assert!(SystemSpec::new("x", 2, 1, vec![e(0, 2, 0)], vec![0], vec![1], None).is_err());
        assert!(SystemSpec::new("x", 2, 1, vec![e(0, 1, 1)], vec![0], vec![1], None).is_err());
        assert!(SystemSpec::new("x", 2, 1, vec![e(0, 1, 0)], vec![0], vec![0], None).is_err());
        assert!(SystemSpec::new("x", 2, 1, vec![e(0, 1, 0)], vec![], vec![1], None).is_err());
        assert!(
            SystemSpec::new("x", 2, 1, vec![e(0, 1, 0)], vec![0], vec![1], Some(vec![0.0])).is_err()
        );
        assert!(SystemSpec::new("x", 2, 1, vec![e(0, 1, 0)], vec![0], vec![1], None).is_ok());
    }

    #[test]
    fn state_bits_validated() {
        assert!(StateVector::from_bits(&[0, 1, 2]).is_err());
        let s = StateVector::from_bits(&[1, 0, 1, 0, 0]).unwrap();
        assert_eq!(s.damaged().collect::<Vec<_>>(), vec![1, 3, 4]);
    }

    #[test]
    fn adjacency_dimension_mismatch() {
        let spec = SystemSpec::new(
            "x",
            2,
            1,
            vec![Edge { from: 0, to: 1, component: 0 }],
            vec![0],
            vec![1],
            None,
        )
        .unwrap();
        assert!(build_adjacency(&spec, &StateVector::all_operational(2)).is_err());
    }

    #[test]
    fn empty_adjacency_has_empty_closure() {
        let r = reachability(&BitMatrix::new(4));
        assert_eq!(r.as_matrix().count_ones(), 0);
    }

    #[test]
    fn chain_closure() {
        let r = reachability(&chain3());
        assert!(r.reachable(0, 2));
        assert!(!r.reachable(2, 0));
        assert!(!r.reachable(0, 0));
    }

    #[test]
    fn set_queries() {
        let r = reachability(&chain3());
        assert!(r.any_reaches(&[0], 2).unwrap());
        assert!(!r.any_reaches(&[2], 0).unwrap());
        // length-zero paths do not count
        assert!(!r.any_reaches(&[2], 2).unwrap());
        assert!(r.reaches_any(0, &[2]).unwrap());
        assert!(r.any_reaches(&[], 2).is_err());
        assert!(r.reaches_any(0, &[7]).is_err());
    }

    #[test]
    fn self_loop_only_through_cycle() {
        let mut m = chain3();
        m.set(2, 0);
        let r = reachability(&m);
        assert!((0..3).all(|i| r.reachable(i, i)));
    }

    #[test]
    fn non_square_rows_rejected() {
        assert!(BitMatrix::from_rows(&[vec![true, false], vec![true]]).is_err());
    }

    #[test]
    fn wide_matrices_span_words() {
        let n = 130;
        let mut m = BitMatrix::new(n);
        for i in 0..n - 1 {
            m.set(i, i + 1);
        }
        let r = reachability(&m);
        assert!(r.reachable(0, n - 1));
        assert!(!r.reachable(n - 1, 0));
    }
}
