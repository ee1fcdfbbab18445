//! Exact degree-0 and degree-1 persistence of a Dowker skeleton.

use rustc_hash::FxHashMap as HashMap;

use serde::{Deserialize, Serialize};

use super::diagram::{EdgePoint, EdgePointMap, PdPoint, PersistenceDiagram};
use super::union_find::ElderUnionFind;
use crate::dowker::DowkerSkeleton;
use crate::graph::{FiltrationWeight, Kind, WeightedDigraph};

/// Bookkeeping from the degree-1 reduction.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionStats {
    pub edges: usize,
    pub positive_edges: usize,
    pub triangles: usize,
    pub paired_triangles: usize,
    pub essential: usize,
}

/// XOR of two sorted index sets.
fn add_into(target: &mut Vec<u32>, source: &[u32], scratch: &mut Vec<u32>) {
    scratch.clear();
    let (mut i, mut j) = (0, 0);
    while i < target.len() && j < source.len() {
        match target[i].cmp(&source[j]) {
            std::cmp::Ordering::Less => {
                scratch.push(target[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                scratch.push(source[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    scratch.extend_from_slice(&target[i..]);
    scratch.extend_from_slice(&source[j..]);
    std::mem::swap(target, scratch);
}

/// Position of each edge among the dim-1 simplices.
enum EdgeIndex {
    Dense { n: usize, slots: Vec<u32> },
    Sparse(HashMap<[usize; 2], u32>),
}

/// Largest `n²` served by a dense table.
const DENSE_EDGE_SLOTS: usize = 1 << 22;

impl EdgeIndex {
    /// Takes `slots` as the dense table's storage when it applies.
    fn new(n: usize, mut slots: Vec<u32>) -> Self {
        if n * n <= DENSE_EDGE_SLOTS {
            slots.clear();
            slots.resize(n * n, u32::MAX);
            EdgeIndex::Dense { n, slots }
        } else {
            EdgeIndex::Sparse(HashMap::default())
        }
    }

    fn into_slots(self) -> Vec<u32> {
        match self {
            EdgeIndex::Dense { slots, .. } => slots,
            EdgeIndex::Sparse(_) => Vec::new(),
        }
    }

    fn insert(&mut self, [a, b]: [usize; 2], i: u32) {
        match self {
            EdgeIndex::Dense { n, slots } => slots[a * *n + b] = i,
            EdgeIndex::Sparse(m) => {
                m.insert([a, b], i);
            }
        }
    }

    #[inline]
    fn get(&self, [a, b]: [usize; 2]) -> u32 {
        match self {
            EdgeIndex::Dense { n, slots } => slots[a * *n + b],
            EdgeIndex::Sparse(m) => m[&[a, b]],
        }
    }
}

struct EdgeRecord {
    value: FiltrationWeight,
    /// Closed a cycle instead of merging two components.
    cycle: bool,
    /// Location in the column pool of the reduced column whose lowest entry
    /// is this edge.
    pivot: Option<(u32, u32)>,
    death: Option<FiltrationWeight>,
}

/// Buffers reused by successive sweeps on one thread.
#[derive(Default)]
struct SweepScratch {
    uf: ElderUnionFind,
    slots: Vec<u32>,
    edges: Vec<EdgeRecord>,
    pool: Vec<u32>,
    col: Vec<u32>,
    sum: Vec<u32>,
}

thread_local! {
    static SWEEP_SCRATCH: std::cell::RefCell<SweepScratch> = std::cell::RefCell::default();
}

/// Output of one sweep over the skeleton.
struct Sweep {
    pd0: PersistenceDiagram,
    pd1: PersistenceDiagram,
    stats: ReductionStats,
    vertex_point: Vec<Option<PdPoint>>,
}

/// One pass in filtration order. Vertices and edges feed the elder-rule
/// union-find; every triangle is reduced on arrival, since all of its
/// edges come earlier in the order. With `with_pd1` unset, triangles are
/// skipped.
fn sweep(sk: &DowkerSkeleton, node_count: usize, with_pd1: bool) -> Sweep {
    let mut ws = SWEEP_SCRATCH.take();
    let out = sweep_in(sk, node_count, with_pd1, &mut ws);
    SWEEP_SCRATCH.set(ws);
    out
}

fn sweep_in(
    sk: &DowkerSkeleton,
    node_count: usize,
    with_pd1: bool,
    ws: &mut SweepScratch,
) -> Sweep {
    let edge_total = sk.count_by_dim()[1];
    let uf = &mut ws.uf;
    uf.reset(node_count);
    let mut vertex_point: Vec<Option<PdPoint>> = vec![None; node_count];
    let mut edge_index = EdgeIndex::new(
        if with_pd1 { node_count } else { 0 },
        std::mem::take(&mut ws.slots),
    );
    let edges = &mut ws.edges;
    edges.clear();
    edges.reserve(edge_total);
    let (pool, col, scratch) = (&mut ws.pool, &mut ws.col, &mut ws.sum);
    pool.clear();
    let mut stats = ReductionStats {
        edges: edge_total,
        ..Default::default()
    };
    // while every cycle edge seen so far is a pivot, triangles reduce to zero
    let mut open_cycles = 0usize;

    for s in sk.simplices() {
        match *s.vertices() {
            [v] => {
                uf.activate(v, s.value());
                vertex_point[v] = Some(PdPoint::essential(s.value()));
            }
            [a, b] => {
                let cycle = match uf.union(a, b) {
                    Some(dead) => {
                        vertex_point[dead.founder] = Some(PdPoint::finite(dead.birth, s.value()));
                        false
                    }
                    None => true,
                };
                if with_pd1 {
                    edge_index.insert([a, b], edges.len() as u32);
                }
                edges.push(EdgeRecord {
                    value: s.value(),
                    cycle,
                    pivot: None,
                    death: None,
                });
                if cycle {
                    stats.positive_edges += 1;
                    open_cycles += 1;
                }
            }
            [a, b, c] => {
                stats.triangles += 1;
                if !with_pd1 || open_cycles == 0 {
                    continue;
                }
                let mut face = [
                    edge_index.get([a, b]),
                    edge_index.get([a, c]),
                    edge_index.get([b, c]),
                ];
                face.sort_unstable();
                col.clear();
                col.extend_from_slice(&face);
                while let Some(&low) = col.last() {
                    match edges[low as usize].pivot {
                        Some((start, len)) => {
                            let (start, len) = (start as usize, len as usize);
                            add_into(col, &pool[start..start + len], scratch)
                        }
                        None => break,
                    }
                }
                if let Some(&low) = col.last() {
                    let e = &mut edges[low as usize];
                    e.death = Some(s.value());
                    e.pivot = Some((pool.len() as u32, col.len() as u32));
                    pool.extend_from_slice(col);
                    stats.paired_triangles += 1;
                    open_cycles -= 1;
                }
            }
            _ => unreachable!("skeleton holds dimensions 0 to 2"),
        }
    }

    let mut born = Vec::with_capacity(node_count);
    born.extend(vertex_point.iter().flatten().copied());
    let pd0 = PersistenceDiagram::new(0, born).sorted();
    let mut points = Vec::new();
    if with_pd1 {
        points.reserve(stats.positive_edges);
        for e in edges.iter().filter(|e| e.cycle) {
            match e.death {
                Some(d) => points.push(PdPoint::finite(e.value, d)),
                None => {
                    points.push(PdPoint::essential(e.value));
                    stats.essential += 1;
                }
            }
        }
    }
    ws.slots = edge_index.into_slots();
    Sweep {
        pd0,
        pd1: PersistenceDiagram::new(1, points).sorted(),
        stats,
        vertex_point,
    }
}

/// Both diagrams of a skeleton plus the per-vertex degree-0 points.
#[derive(Clone, Debug)]
pub struct SkeletonPersistence {
    pub pd0: PersistenceDiagram,
    pub pd1: PersistenceDiagram,
    pub stats: ReductionStats,
    vertex_point: Vec<Option<PdPoint>>,
}

impl SkeletonPersistence {
    pub fn compute(sk: &DowkerSkeleton, node_count: usize) -> Self {
        let sw = sweep(sk, node_count, true);
        SkeletonPersistence {
            pd0: sw.pd0,
            pd1: sw.pd1,
            stats: sw.stats,
            vertex_point: sw.vertex_point,
        }
    }

    /// Assigns each original edge its degree-0 point. Edges are visited in
    /// (weight, id) order; the first edge incident to a complex vertex in
    /// the member role carries that vertex's point, every other edge gets
    /// the diagonal point at its own weight.
    pub fn edge_map(&self, g: &WeightedDigraph, kind: Kind) -> EdgePointMap {
        let mut order: Vec<usize> = (0..g.edge_count()).collect();
        order.sort_by_key(|&i| (g.edges()[i].weight, i));
        let mut claimed = vec![false; g.node_count()];
        let mut entries = vec![None; g.edge_count()];
        for id in order {
            let e = &g.edges()[id];
            let (member, _) = WeightedDigraph::member_witness(e, kind);
            let point = if !claimed[member] {
                claimed[member] = true;
                let p = self.vertex_point[member].expect("member vertex is in the skeleton");
                debug_assert_eq!(p.birth, e.weight);
                p
            } else {
                PdPoint::finite(e.weight, e.weight)
            };
            entries[id] = Some(EdgePoint::new(point));
        }
        EdgePointMap::new(
            entries
                .into_iter()
                .map(|e| e.expect("every edge visited"))
                .collect(),
        )
    }
}

/// Degree-0 diagram and the per-edge point map.
pub fn pd0_with_edge_map(g: &WeightedDigraph, kind: Kind) -> (PersistenceDiagram, EdgePointMap) {
    let sk = DowkerSkeleton::build(g, kind);
    let sw = sweep(&sk, g.node_count(), false);
    let sp = SkeletonPersistence {
        pd0: sw.pd0,
        pd1: PersistenceDiagram::empty(1),
        stats: ReductionStats::default(),
        vertex_point: sw.vertex_point,
    };
    let map = sp.edge_map(g, kind);
    (sp.pd0, map)
}

pub fn pd1(g: &WeightedDigraph, kind: Kind) -> PersistenceDiagram {
    diagrams(g, kind).1
}

/// `(PD0, PD1)` from a single skeleton build.
pub fn diagrams(g: &WeightedDigraph, kind: Kind) -> (PersistenceDiagram, PersistenceDiagram) {
    let sk = DowkerSkeleton::build(g, kind);
    let sp = SkeletonPersistence::compute(&sk, g.node_count());
    (sp.pd0, sp.pd1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualityReport {
    pub pd0_match: bool,
    pub pd1_match: bool,
}

impl DualityReport {
    pub fn holds(&self) -> bool {
        self.pd0_match && self.pd1_match
    }
}

/// Compares the source and sink diagrams after discarding zero-persistence
/// points.
pub fn check_duality(g: &WeightedDigraph) -> DualityReport {
    let (so0, so1) = diagrams(g, Kind::Source);
    let (si0, si1) = diagrams(g, Kind::Sink);
    DualityReport {
        pd0_match: so0.positive().multiset_eq(&si0.positive()),
        pd1_match: so1.positive().multiset_eq(&si1.positive()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::persistence::PointClass;

    fn w(x: f64) -> FiltrationWeight {
        FiltrationWeight::new(x).unwrap()
    }

    fn star() -> WeightedDigraph {
        WeightedDigraph::from_edges(5, [(1, 4, 0.1), (2, 4, 0.2), (3, 4, 0.3)]).unwrap()
    }

    #[test]
    fn star_pd0_and_map() {
        let (pd0, map) = pd0_with_edge_map(&star(), Kind::Sink);
        assert_eq!(
            pd0.points,
            vec![
                PdPoint::essential(w(0.1)),
                PdPoint::finite(w(0.2), w(0.2)),
                PdPoint::finite(w(0.3), w(0.3)),
            ]
        );
        assert_eq!(map.get(0).class, PointClass::Unpaired);
        assert_eq!(map.get(1).point, PdPoint::finite(w(0.2), w(0.2)));
        assert_eq!(map.get(2).class, PointClass::Disappearing);
    }

    #[test]
    fn star_pd1() {
        assert_eq!(
            pd1(&star(), Kind::Sink).points,
            vec![PdPoint::finite(w(0.3), w(0.3))]
        );
    }

    #[test]
    fn single_edge() {
        let g = WeightedDigraph::from_edges(2, [(0, 1, 0.4)]).unwrap();
        let (pd0, map) = pd0_with_edge_map(&g, Kind::Sink);
        assert_eq!(pd0.points, vec![PdPoint::essential(w(0.4))]);
        assert_eq!(map.get(0).class, PointClass::Unpaired);
        assert!(check_duality(&g).holds());
    }

    #[test]
    fn four_cycle_of_sinks_is_essential() {
        // members 1..4, witnesses a=5, b=6, c=7, d=8
        let g = WeightedDigraph::from_edges(
            9,
            [
                (1, 5, 0.1),
                (2, 5, 0.1),
                (2, 6, 0.2),
                (3, 6, 0.2),
                (3, 7, 0.3),
                (4, 7, 0.3),
                (4, 8, 0.4),
                (1, 8, 0.4),
            ],
        )
        .unwrap();
        let (pd0, pd1) = diagrams(&g, Kind::Sink);
        assert_eq!(pd1.positive().points, vec![PdPoint::essential(w(0.4))]);
        assert_eq!(pd0.positive().points, vec![PdPoint::essential(w(0.1))]);
    }

    #[test]
    fn star_duality() {
        let (so0, _) = diagrams(&star(), Kind::Source);
        let (si0, _) = diagrams(&star(), Kind::Sink);
        assert_eq!(so0.positive().points, vec![PdPoint::essential(w(0.1))]);
        assert_eq!(si0.positive().points, vec![PdPoint::essential(w(0.1))]);
        assert!(check_duality(&star()).holds());
    }

    #[test]
    fn conservation() {
        let sk = DowkerSkeleton::build(&star(), Kind::Sink);
        let sp = SkeletonPersistence::compute(&sk, 5);
        let s = sp.stats;
        assert_eq!(s.positive_edges - s.paired_triangles, s.essential);
        assert_eq!(s.essential, sp.pd1.essential_count());
    }

    #[test]
    fn add_into_is_symmetric_difference() {
        let mut a = vec![1, 3, 5, 7];
        let mut scratch = Vec::new();
        add_into(&mut a, &[3, 4, 7, 9], &mut scratch);
        assert_eq!(a, vec![1, 4, 5, 9]);
    }
}
