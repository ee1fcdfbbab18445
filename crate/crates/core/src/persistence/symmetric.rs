//! Degree-0 persistence of the undirected weighted 1-skeleton.
//!
//! Direction is forgotten, each unordered pair keeps its lightest edge, and
//! every vertex is born at the weight of its lightest incident edge. This is
//! the comparator that cannot tell apart graphs differing only in edge
//! direction or in which of two edges came first.

use std::collections::BTreeMap;

use super::diagram::{PdPoint, PersistenceDiagram};
use super::union_find::ElderUnionFind;
use crate::graph::{FiltrationWeight, WeightedDigraph};

pub fn symmetric_pd0(g: &WeightedDigraph) -> PersistenceDiagram {
    let mut pairs: BTreeMap<(usize, usize), FiltrationWeight> = BTreeMap::new();
    let mut birth: Vec<Option<FiltrationWeight>> = vec![None; g.node_count()];
    for e in g.edges() {
        let key = (e.source.min(e.target), e.source.max(e.target));
        pairs
            .entry(key)
            .and_modify(|w| *w = (*w).min(e.weight))
            .or_insert(e.weight);
        for v in [e.source, e.target] {
            birth[v] = Some(birth[v].map_or(e.weight, |b| b.min(e.weight)));
        }
    }

    // vertices sort before edges at equal value
    let mut events: Vec<(FiltrationWeight, u8, usize, usize)> = birth
        .iter()
        .enumerate()
        .filter_map(|(v, b)| b.map(|b| (b, 0, v, v)))
        .chain(pairs.iter().map(|(&(a, b), &w)| (w, 1, a, b)))
        .collect();
    events.sort_unstable();

    let mut uf = ElderUnionFind::new(g.node_count());
    let mut point: Vec<Option<PdPoint>> = vec![None; g.node_count()];
    for (value, kind, a, b) in events {
        if kind == 0 {
            uf.activate(a, value);
            point[a] = Some(PdPoint::essential(value));
        } else if let Some(dead) = uf.union(a, b) {
            point[dead.founder] = Some(PdPoint::finite(dead.birth, value));
        }
    }
    PersistenceDiagram::new(0, point.into_iter().flatten().collect()).sorted()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(x: f64) -> FiltrationWeight {
        FiltrationWeight::new(x).unwrap()
    }

    #[test]
    fn single_edge() {
        let g = WeightedDigraph::from_edges(2, [(1, 0, 0.6)]).unwrap();
        let pd = symmetric_pd0(&g);
        assert_eq!(pd.positive().points, vec![PdPoint::essential(w(0.6))]);
        // both endpoints are born together; the younger founder dies at once
        assert_eq!(pd.len(), 2);
    }

    #[test]
    fn path_of_three() {
        let g = WeightedDigraph::from_edges(3, [(0, 1, 0.2), (2, 1, 0.5)]).unwrap();
        // vertex 1 is born with vertex 0 at 0.2 and loses the tie
        assert_eq!(
            symmetric_pd0(&g).points,
            vec![
                PdPoint::finite(w(0.2), w(0.2)),
                PdPoint::essential(w(0.2)),
                PdPoint::finite(w(0.5), w(0.5)),
            ]
        );
    }

    #[test]
    fn direction_is_ignored() {
        let g = WeightedDigraph::from_edges(4, [(0, 1, 0.2), (1, 2, 0.5), (3, 2, 0.9)]).unwrap();
        assert_eq!(symmetric_pd0(&g), symmetric_pd0(&g.reversed()));
    }
}
