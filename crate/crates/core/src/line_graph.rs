//! Source and sink line graphs.
//!
//! Both line graphs have one node per original edge. In the source line graph
//! two nodes are adjacent when their edges leave the same node; in the sink
//! line graph when they enter the same node. Each line-graph node carries the
//! filtration weight of its edge.

use serde::{Deserialize, Serialize};

use crate::graph::{FiltrationWeight, Kind, WeightedDigraph};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineGraph {
    kind: Kind,
    node_weight: Vec<FiltrationWeight>,
    /// Sorted neighbor lists, symmetric.
    adjacency: Vec<Vec<usize>>,
    edge_count: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineGraphStats {
    pub nodes: usize,
    pub edges: usize,
    pub max_degree: usize,
}

impl LineGraph {
    /// Builds the line graph of the given kind by grouping edges on their
    /// shared endpoint and emitting one clique per group.
    pub fn build(g: &WeightedDigraph, kind: Kind) -> Self {
        let mut groups: Vec<Vec<usize>> = vec![Vec::new(); g.node_count()];
        for (id, e) in g.edges().iter().enumerate() {
            let shared = match kind {
                Kind::Source => e.source,
                Kind::Sink => e.target,
            };
            groups[shared].push(id);
        }
        let n = g.edge_count();
        let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut edge_count = 0;
        for members in &groups {
            for (i, &a) in members.iter().enumerate() {
                for &b in &members[i + 1..] {
                    adjacency[a].push(b);
                    adjacency[b].push(a);
                    edge_count += 1;
                }
            }
        }
        // Parallel edges are rejected upstream, so two edges share at most
        // one endpoint of a given role and the cliques are disjoint in pairs.
        for nbrs in &mut adjacency {
            nbrs.sort_unstable();
        }
        LineGraph {
            kind,
            node_weight: g.edges().iter().map(|e| e.weight).collect(),
            adjacency,
            edge_count,
        }
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn node_count(&self) -> usize {
        self.node_weight.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn node_weight(&self, u: usize) -> FiltrationWeight {
        self.node_weight[u]
    }

    pub fn node_weights(&self) -> &[FiltrationWeight] {
        &self.node_weight
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.adjacency[u]
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].binary_search(&b).is_ok()
    }

    /// Each undirected edge once, as `(a, b)` with `a < b`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(a, nbrs)| nbrs.iter().filter(move |&&b| b > a).map(move |&b| (a, b)))
    }

    pub fn stats(&self) -> LineGraphStats {
        LineGraphStats {
            nodes: self.node_count(),
            edges: self.edge_count,
            max_degree: self.adjacency.iter().map(Vec::len).max().unwrap_or(0),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let nodes: Vec<_> = self
            .node_weight
            .iter()
            .enumerate()
            .map(|(id, w)| serde_json::json!({ "id": id, "weight": w.get() }))
            .collect();
        let edges: Vec<[usize; 2]> = self.edges().map(|(a, b)| [a, b]).collect();
        serde_json::json!({ "kind": self.kind, "nodes": nodes, "edges": edges })
    }
}

/// Builds the `(source, sink)` line-graph pair. Both share the node set
/// `0..edge_count`.
pub fn build_line_graphs(g: &WeightedDigraph) -> (LineGraph, LineGraph) {
    (
        LineGraph::build(g, Kind::Source),
        LineGraph::build(g, Kind::Sink),
    )
}

pub fn line_graph_stats(lg: &LineGraph) -> LineGraphStats {
    lg.stats()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shared_source_is_adjacent_in_source_graph_only() {
        // 4→1, 4→2
        let g = WeightedDigraph::from_edges(5, [(4, 1, 0.3), (4, 2, 0.6)]).unwrap();
        let (so, si) = build_line_graphs(&g);
        assert!(so.adjacent(0, 1));
        assert_eq!(so.edge_count(), 1);
        assert_eq!(si.edge_count(), 0);
        assert_eq!(so.node_weight(1).get(), 0.6);
    }

    #[test]
    fn shared_sink_forms_triangle() {
        let g = WeightedDigraph::from_edges(5, [(1, 4, 0.1), (2, 4, 0.2), (3, 4, 0.3)]).unwrap();
        let (so, si) = build_line_graphs(&g);
        assert_eq!(
            so.stats(),
            LineGraphStats {
                nodes: 3,
                edges: 0,
                max_degree: 0
            }
        );
        assert_eq!(
            si.stats(),
            LineGraphStats {
                nodes: 3,
                edges: 3,
                max_degree: 2
            }
        );
        assert_eq!(si.edges().collect::<Vec<_>>(), vec![(0, 1), (0, 2), (1, 2)]);
    }

    #[test]
    fn single_edge() {
        let g = WeightedDigraph::from_edges(2, [(0, 1, 0.0)]).unwrap();
        let (so, si) = build_line_graphs(&g);
        for lg in [so, si] {
            assert_eq!(
                lg.stats(),
                LineGraphStats {
                    nodes: 1,
                    edges: 0,
                    max_degree: 0
                }
            );
        }
    }

    #[test]
    fn out_star_is_a_clique() {
        for k in 1..8usize {
            let g = WeightedDigraph::from_edges(k + 1, (1..=k).map(|i| (0, i, 0.5))).unwrap();
            let so = LineGraph::build(&g, Kind::Source);
            assert_eq!(so.edge_count(), k * (k - 1) / 2);
            assert_eq!(so.stats().max_degree, k - 1);
        }
    }

    #[test]
    fn json_shape() {
        let g = WeightedDigraph::from_edges(3, [(0, 1, 0.0), (0, 2, 1.0)]).unwrap();
        let v = LineGraph::build(&g, Kind::Source).to_json();
        assert_eq!(v["kind"], "source");
        assert_eq!(v["nodes"][1]["weight"], 1.0);
        assert_eq!(v["edges"], serde_json::json!([[0, 1]]));
    }
}
