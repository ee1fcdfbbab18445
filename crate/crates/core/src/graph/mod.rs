//! Directed temporal graphs and their normalized filtration weights.
//!
//! A [`TemporalDigraph`] is what comes off disk: dense node ids, timestamped
//! edges, an optional class label. [`TemporalDigraph::normalize`] maps the
//! timestamps affinely onto `[0, 1]`, producing the [`WeightedDigraph`] every
//! downstream stage consumes.

mod io;

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use io::{load_dataset, load_edge_list, write_dataset, write_edge_list, LABELS_FILE};

/// Which shared endpoint defines adjacency: a common source node or a common
/// target node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Source,
    Sink,
}

impl Kind {
    pub fn dual(self) -> Self {
        match self {
            Kind::Source => Kind::Sink,
            Kind::Sink => Kind::Source,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Source => "source",
            Kind::Sink => "sink",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "source" | "so" => Ok(Kind::Source),
            "sink" | "si" => Ok(Kind::Sink),
            other => Err(Error::InvalidConfig(format!("unknown kind `{other}`"))),
        }
    }
}

/// A normalized filtration value in `[0, 1]`.
///
/// Always finite, so it carries a total order.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct FiltrationWeight(f64);

impl FiltrationWeight {
    pub const ZERO: Self = FiltrationWeight(0.0);
    pub const ONE: Self = FiltrationWeight(1.0);

    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            // fold -0.0 so equal weights are bitwise equal
            Ok(FiltrationWeight(value + 0.0))
        } else {
            Err(Error::WeightOutOfRange(value))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }

    /// Bit pattern; monotone in the value since weights are non-negative.
    #[inline]
    pub(crate) fn to_bits(self) -> u64 {
        self.0.to_bits()
    }
}

impl Eq for FiltrationWeight {}

impl Ord for FiltrationWeight {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl PartialOrd for FiltrationWeight {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl std::hash::Hash for FiltrationWeight {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.0.to_bits().hash(state);
    }
}

impl TryFrom<f64> for FiltrationWeight {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        FiltrationWeight::new(value)
    }
}

impl From<FiltrationWeight> for f64 {
    fn from(w: FiltrationWeight) -> f64 {
        w.0
    }
}

impl fmt::Display for FiltrationWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TemporalEdge {
    pub source: usize,
    pub target: usize,
    pub time: f64,
}

/// Directed graph with timestamped edges.
///
/// Invariants: node ids lie in `0..node_count`, no self-loops, at most one
/// edge per ordered pair. Constructors enforce them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TemporalDigraph {
    node_count: usize,
    edges: Vec<TemporalEdge>,
    pub label: Option<i64>,
}

impl TemporalDigraph {
    /// Builds a graph from raw `(source, target, time)` triples.
    ///
    /// Self-loops are dropped and repeated ordered pairs collapse onto their
    /// earliest time; the surviving edge keeps the position of the pair's
    /// first occurrence.
    pub fn from_edges(
        node_count: usize,
        raw: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let mut edges: Vec<TemporalEdge> = Vec::new();
        let mut slot: HashMap<(usize, usize), usize> = HashMap::new();
        for (source, target, time) in raw {
            if source >= node_count || target >= node_count {
                return Err(Error::InvalidGraph(format!(
                    "edge ({source}, {target}) references a node outside 0..{node_count}"
                )));
            }
            if !time.is_finite() {
                return Err(Error::InvalidGraph(format!(
                    "edge ({source}, {target}) has non-finite time {time}"
                )));
            }
            if source == target {
                continue;
            }
            match slot.get(&(source, target)) {
                Some(&i) => {
                    if time < edges[i].time {
                        edges[i].time = time;
                    }
                }
                None => {
                    slot.insert((source, target), edges.len());
                    edges.push(TemporalEdge {
                        source,
                        target,
                        time,
                    });
                }
            }
        }
        if edges.is_empty() {
            return Err(Error::EmptyGraph);
        }
        Ok(TemporalDigraph {
            node_count,
            edges,
            label: None,
        })
    }

    pub fn with_label(mut self, label: Option<i64>) -> Self {
        self.label = label;
        self
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[TemporalEdge] {
        &self.edges
    }

    /// Maps every timestamp onto `(t - t_min) / (t_max - t_min)`.
    ///
    /// When all timestamps coincide every weight is zero.
    pub fn normalize(&self) -> WeightedDigraph {
        let (lo, hi) = self
            .edges
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), e| {
                (lo.min(e.time), hi.max(e.time))
            });
        let span = hi - lo;
        let edges = self
            .edges
            .iter()
            .map(|e| {
                let w = if span > 0.0 {
                    ((e.time - lo) / span).clamp(0.0, 1.0)
                } else {
                    0.0
                };
                WeightedEdge {
                    source: e.source,
                    target: e.target,
                    weight: FiltrationWeight(w + 0.0),
                }
            })
            .collect();
        WeightedDigraph {
            node_count: self.node_count,
            edges,
        }
    }
}

/// Free-function form of [`TemporalDigraph::normalize`].
pub fn normalize_weights(g: &TemporalDigraph) -> WeightedDigraph {
    g.normalize()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightedEdge {
    pub source: usize,
    pub target: usize,
    pub weight: FiltrationWeight,
}

/// Directed graph with normalized edge weights. Edge ids are the dense
/// positions `0..edge_count()`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedDigraph {
    node_count: usize,
    edges: Vec<WeightedEdge>,
}

impl WeightedDigraph {
    /// Builds a weighted graph directly. Unlike temporal ingestion this is
    /// strict: self-loops, repeated pairs and weights outside `[0, 1]` are
    /// errors.
    pub fn from_edges(
        node_count: usize,
        raw: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        let mut edges = Vec::new();
        for (source, target, weight) in raw {
            if source >= node_count || target >= node_count {
                return Err(Error::InvalidGraph(format!(
                    "edge ({source}, {target}) references a node outside 0..{node_count}"
                )));
            }
            if source == target {
                return Err(Error::InvalidGraph(format!("self-loop at node {source}")));
            }
            if !seen.insert((source, target)) {
                return Err(Error::InvalidGraph(format!(
                    "repeated edge ({source}, {target})"
                )));
            }
            edges.push(WeightedEdge {
                source,
                target,
                weight: FiltrationWeight::new(weight)?,
            });
        }
        if edges.is_empty() {
            return Err(Error::EmptyGraph);
        }
        Ok(WeightedDigraph { node_count, edges })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[WeightedEdge] {
        &self.edges
    }

    pub fn weights(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        self.edges.iter().map(|e| e.weight.get())
    }

    /// The same graph with every edge reversed. Edge ids are preserved.
    pub fn reversed(&self) -> Self {
        WeightedDigraph {
            node_count: self.node_count,
            edges: self
                .edges
                .iter()
                .map(|e| WeightedEdge {
                    source: e.target,
                    target: e.source,
                    weight: e.weight,
                })
                .collect(),
        }
    }

    /// Reorders edges so that new edge `i` is old edge `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.edges.len(), "permutation length");
        WeightedDigraph {
            node_count: self.node_count,
            edges: perm.iter().map(|&i| self.edges[i]).collect(),
        }
    }

    /// `(member, witness)` endpoints of an edge for the given kind: for sink
    /// complexes the source is the member and the target witnesses it.
    #[inline]
    pub(crate) fn member_witness(e: &WeightedEdge, kind: Kind) -> (usize, usize) {
        match kind {
            Kind::Sink => (e.source, e.target),
            Kind::Source => (e.target, e.source),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn weights_of(times: &[f64]) -> Vec<f64> {
        let n = times.len() + 1;
        let g =
            TemporalDigraph::from_edges(n, times.iter().enumerate().map(|(i, &t)| (i, i + 1, t)))
                .unwrap();
        g.normalize().weights().collect()
    }

    #[test]
    fn normalize_endpoints_and_midpoint() {
        assert_eq!(weights_of(&[2.0, 4.0, 6.0]), vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn normalize_degenerate_times() {
        assert_eq!(weights_of(&[9.0, 9.0, 9.0]), vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn normalize_direct_formula() {
        let w = weights_of(&[0.0, 0.1, 0.3]);
        assert_eq!(w[0], 0.0);
        assert!((w[1] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(w[2], 1.0);
    }

    #[test]
    fn self_loops_dropped_and_duplicates_take_min_time() {
        let g = TemporalDigraph::from_edges(3, [(0, 1, 5.0), (0, 1, 3.0), (2, 2, 1.0)]).unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(
            g.edges(),
            &[TemporalEdge {
                source: 0,
                target: 1,
                time: 3.0
            }]
        );
    }

    #[test]
    fn only_self_loops_is_empty() {
        assert!(matches!(
            TemporalDigraph::from_edges(2, [(1, 1, 0.0)]),
            Err(Error::EmptyGraph)
        ));
    }

    #[test]
    fn weighted_graph_rejects_bad_input() {
        assert!(WeightedDigraph::from_edges(2, [(0, 1, 1.5)]).is_err());
        assert!(WeightedDigraph::from_edges(2, [(0, 0, 0.5)]).is_err());
        assert!(WeightedDigraph::from_edges(2, [(0, 1, 0.5), (0, 1, 0.2)]).is_err());
        assert!(WeightedDigraph::from_edges(2, [(0, 2, 0.5)]).is_err());
    }

    #[test]
    fn reversal_is_an_involution() {
        let g = WeightedDigraph::from_edges(3, [(0, 1, 0.1), (2, 1, 0.7)]).unwrap();
        assert_eq!(g.reversed().reversed(), g);
        assert_eq!(g.reversed().edges()[1].source, 1);
    }

    #[test]
    fn filtration_weight_bounds() {
        assert!(FiltrationWeight::new(-0.1).is_err());
        assert!(FiltrationWeight::new(f64::NAN).is_err());
        assert_eq!(FiltrationWeight::new(-0.0).unwrap().get().to_bits(), 0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn normalized_weights_are_order_preserving(times in prop::collection::vec(-1e6f64..1e6, 2..40)) {
                let n = times.len() + 1;
                let g = TemporalDigraph::from_edges(n, times.iter().enumerate().map(|(i, &t)| (i, i + 1, t))).unwrap();
                let w: Vec<f64> = g.normalize().weights().collect();
                let lo = times.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = times.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                for &x in &w {
                    prop_assert!((0.0..=1.0).contains(&x));
                }
                if hi > lo {
                    prop_assert!(w.contains(&0.0));
                    prop_assert!(w.contains(&1.0));
                    for i in 0..times.len() {
                        for j in 0..times.len() {
                            if times[i] < times[j] {
                                prop_assert!(w[i] < w[j]);
                            }
                        }
                    }
                }
            }
        }
    }
}
