//! Filtered 2-skeleton of the Dowker sink and source complexes.
//!
//! A set of nodes spans a sink simplex at level `δ` when some witness node
//! receives an edge of weight `≤ δ` from every member; source simplices use
//! edges leaving the witness instead. The filtration value of a simplex is
//! therefore `min_w max_{b ∈ σ} weight(b, w)`, and simplices without any
//! witness are absent. Only dimensions 0 to 2 are materialized, which is all
//! that degree-0 and degree-1 persistence need.

use rustc_hash::{FxHashMap as HashMap, FxHashSet as HashSet};
use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{FiltrationWeight, Kind, WeightedDigraph};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FilteredSimplex {
    verts: [usize; 3],
    dim: u8,
    value: FiltrationWeight,
}

impl FilteredSimplex {
    /// `vertices` must be strictly increasing and hold 1 to 3 ids.
    pub fn new(vertices: &[usize], value: FiltrationWeight) -> Self {
        assert!((1..=3).contains(&vertices.len()), "simplex arity");
        assert!(
            vertices.windows(2).all(|w| w[0] < w[1]),
            "simplex vertices must be strictly increasing"
        );
        let mut verts = [usize::MAX; 3];
        verts[..vertices.len()].copy_from_slice(vertices);
        FilteredSimplex {
            verts,
            dim: (vertices.len() - 1) as u8,
            value,
        }
    }

    pub fn vertices(&self) -> &[usize] {
        &self.verts[..=self.dim as usize]
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn value(&self) -> FiltrationWeight {
        self.value
    }

    /// Filtration order: value, then dimension, then vertex tuple.
    pub fn filtration_cmp(&self, other: &Self) -> Ordering {
        self.value
            .cmp(&other.value)
            .then(self.dim.cmp(&other.dim))
            .then_with(|| self.verts.cmp(&other.verts))
    }
}

impl Serialize for FilteredSimplex {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            v: &'a [usize],
            value: f64,
            dim: u8,
        }
        Repr {
            v: self.vertices(),
            value: self.value.get(),
            dim: self.dim,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FilteredSimplex {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            v: Vec<usize>,
            value: FiltrationWeight,
        }
        let r = Repr::deserialize(d)?;
        if !(1..=3).contains(&r.v.len()) || !r.v.windows(2).all(|w| w[0] < w[1]) {
            return Err(serde::de::Error::custom("bad simplex vertex list"));
        }
        Ok(FilteredSimplex::new(&r.v, r.value))
    }
}

/// The filtered simplices of one Dowker complex, in filtration order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DowkerSkeleton {
    kind: Kind,
    simplices: Vec<FilteredSimplex>,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SkeletonOptions {
    /// Abort when the number of candidate pairs and triples over all
    /// witnesses exceeds this.
    pub work_cap: Option<usize>,
    pub parallel: bool,
}

/// Members of every witness, stored contiguously: witness `w` owns
/// `members[offsets[w]..offsets[w + 1]]`, sorted by (weight, id).
#[derive(Default)]
struct Witnessed {
    offsets: Vec<usize>,
    members: Vec<(FiltrationWeight, usize)>,
}

impl Witnessed {
    fn iter(&self) -> impl Iterator<Item = &[(FiltrationWeight, usize)]> + '_ {
        self.offsets.windows(2).map(|w| &self.members[w[0]..w[1]])
    }

    fn par_iter(&self) -> impl ParallelIterator<Item = &[(FiltrationWeight, usize)]> + '_ {
        self.offsets
            .par_windows(2)
            .map(|w| &self.members[w[0]..w[1]])
    }

    /// Refills from `g`, reusing the buffers.
    fn fill(&mut self, g: &WeightedDigraph, kind: Kind) {
        let n = g.node_count();
        self.offsets.clear();
        self.offsets.resize(n + 1, 0);
        for e in g.edges() {
            self.offsets[WeightedDigraph::member_witness(e, kind).1] += 1;
        }
        for w in 1..n {
            self.offsets[w] += self.offsets[w - 1];
        }
        self.offsets[n] = g.edge_count();
        // offsets[w] holds the end of bucket w; placing counts it down to the start
        self.members.clear();
        self.members
            .resize(g.edge_count(), (FiltrationWeight::ZERO, 0));
        for e in g.edges() {
            let (member, witness) = WeightedDigraph::member_witness(e, kind);
            self.offsets[witness] -= 1;
            self.members[self.offsets[witness]] = (e.weight, member);
        }
        for w in 0..n {
            self.members[self.offsets[w]..self.offsets[w + 1]].sort_unstable();
        }
    }
}

/// Buffers reused by successive builds on one thread.
#[derive(Default)]
struct BuildScratch {
    lists: Witnessed,
    vertex_min: Vec<Option<FiltrationWeight>>,
    order: Vec<u128>,
    start: Vec<usize>,
    filled: Vec<usize>,
    arrived: Vec<usize>,
    vertex_seen: Vec<bool>,
    seen_bits: Vec<u64>,
    seen_set: HashSet<u64>,
    run: Vec<u64>,
}

thread_local! {
    static BUILD_SCRATCH: std::cell::RefCell<BuildScratch> = std::cell::RefCell::default();
}

/// Pairs plus triples over all witnesses, from the bucket offsets of
/// each witness's members.
fn candidate_work(start: &[usize]) -> usize {
    start
        .windows(2)
        .map(|w| {
            let k = w[1] - w[0];
            k * k.saturating_sub(1) / 2 + k * k.saturating_sub(1) * k.saturating_sub(2) / 6
        })
        .sum()
}

/// Fills `start` with bucket offsets: witness `w` has
/// `start[w + 1] - start[w]` members.
fn bucket_offsets(g: &WeightedDigraph, kind: Kind, start: &mut Vec<usize>) {
    let n = g.node_count();
    start.clear();
    start.resize(n + 1, 0);
    for e in g.edges() {
        start[WeightedDigraph::member_witness(e, kind).1 + 1] += 1;
    }
    for w in 0..n {
        start[w + 1] += start[w];
    }
}

/// Running minimum per pair and per triple of members.
#[derive(Default)]
struct Minima {
    pairs: HashMap<[usize; 2], FiltrationWeight>,
    triples: HashMap<[usize; 3], FiltrationWeight>,
}

/// Cap on the up-front reservation for the simplex list.
const LIST_WORK_MAX: usize = 1 << 16;

/// Calls `f(vertices, value)` for every pair and triple of `members`.
/// Members are sorted by weight, so the last member of any combination
/// carries the combination's max.
#[inline]
fn for_each_candidate(
    members: &[(FiltrationWeight, usize)],
    mut f: impl FnMut(&[usize], FiltrationWeight),
) {
    for k in 1..members.len() {
        let (value, c) = members[k];
        for j in 0..k {
            let b = members[j].1;
            f(&sorted2(b, c), value);
            for &(_, a) in &members[..j] {
                f(&sorted3(a, b, c), value);
            }
        }
    }
}

impl Minima {
    fn visit_witness(&mut self, members: &[(FiltrationWeight, usize)]) {
        for_each_candidate(members, |v, value| match *v {
            [a, b] => {
                self.pairs
                    .entry([a, b])
                    .and_modify(|x| *x = (*x).min(value))
                    .or_insert(value);
            }
            [a, b, c] => {
                self.triples
                    .entry([a, b, c])
                    .and_modify(|x| *x = (*x).min(value))
                    .or_insert(value);
            }
            _ => unreachable!(),
        });
    }

    fn merge(mut self, other: Minima) -> Minima {
        for (k, v) in other.pairs {
            self.pairs
                .entry(k)
                .and_modify(|x| *x = (*x).min(v))
                .or_insert(v);
        }
        for (k, v) in other.triples {
            self.triples
                .entry(k)
                .and_modify(|x| *x = (*x).min(v))
                .or_insert(v);
        }
        self
    }

    fn into_simplices(self, out: &mut Vec<FilteredSimplex>) {
        out.extend(
            self.pairs
                .into_iter()
                .map(|(k, w)| FilteredSimplex::new(&k, w)),
        );
        out.extend(
            self.triples
                .into_iter()
                .map(|(k, w)| FilteredSimplex::new(&k, w)),
        );
    }
}

/// Vertex ids below this fit the packed key layout.
const PACKED_ID_LIMIT: usize = 1 << 20;

/// `dim` in the top bits, then the vertex ids in 20-bit fields, so numeric
/// order is (dim, lexicographic vertices).
#[inline]
fn pack_shape(v: &[usize]) -> u64 {
    let mut key = ((v.len() - 1) as u64) << 60;
    for (i, &x) in v.iter().enumerate() {
        key |= (x as u64) << (40 - 20 * i);
    }
    key
}

#[inline]
fn unpack_shape(shape: u64, value: FiltrationWeight) -> FilteredSimplex {
    let dim = (shape >> 60) as u8;
    let field = |i: u32| ((shape >> (40 - 20 * i)) & 0xf_ffff) as usize;
    let verts = match dim {
        0 => [field(0), usize::MAX, usize::MAX],
        1 => [field(0), field(1), usize::MAX],
        _ => [field(0), field(1), field(2)],
    };
    FilteredSimplex { verts, dim, value }
}

/// Vertex counts up to this track emitted shapes in a bitset over all
/// pairs and triples instead of a hash set.
const BITSET_MAX_NODES: usize = 32;

/// Shapes already emitted, keyed by their packed form.
enum Seen<'a> {
    Bits { n: usize, words: &'a mut Vec<u64> },
    Set(&'a mut HashSet<u64>),
}

impl Seen<'_> {
    /// Records `v`; true when it was not seen before.
    #[inline]
    fn insert(&mut self, v: &[usize], key: u64) -> bool {
        match self {
            Seen::Bits { n, words } => {
                let n = *n;
                let slot = match *v {
                    [a, b] => a * n + b,
                    [a, b, c] => n * n + (a * n + b) * n + c,
                    _ => unreachable!(),
                };
                let (word, bit) = (slot / 64, 1u64 << (slot % 64));
                let fresh = words[word] & bit == 0;
                words[word] |= bit;
                fresh
            }
            Seen::Set(set) => set.insert(key),
        }
    }
}

/// Skeleton from a single pass over the edges in weight order; `ws.start`
/// must hold the bucket offsets. An edge
/// from member `c` to witness `w` completes every pair and triple of `c`
/// with earlier members of `w` at the edge's weight, so candidates arrive
/// with nondecreasing values and the first arrival of a shape carries its
/// minimum. Shapes arriving at one value are ordered by (dim, vertices).
fn ordered_skeleton(
    g: &WeightedDigraph,
    kind: Kind,
    ws: &mut BuildScratch,
    capacity: usize,
) -> Vec<FilteredSimplex> {
    let n = g.node_count();
    let edges = g.edges();

    ws.filled.clear();
    ws.filled.extend_from_slice(&ws.start[..n]);
    ws.arrived.clear();
    ws.arrived.resize(edges.len(), 0);
    ws.vertex_seen.clear();
    ws.vertex_seen.resize(n, false);

    ws.order.clear();
    ws.order.extend(
        edges
            .iter()
            .enumerate()
            .map(|(i, e)| ((e.weight.to_bits() as u128) << 64) | i as u128),
    );
    ws.order.sort_unstable();

    let mut seen = if n <= BITSET_MAX_NODES {
        ws.seen_bits.clear();
        ws.seen_bits.resize((n * n + n * n * n) / 64 + 1, 0);
        Seen::Bits {
            n,
            words: &mut ws.seen_bits,
        }
    } else {
        ws.seen_set.clear();
        Seen::Set(&mut ws.seen_set)
    };

    let mut out: Vec<FilteredSimplex> = Vec::with_capacity(capacity);
    let run = &mut ws.run;
    run.clear();
    let mut run_value = FiltrationWeight::ZERO;
    let flush = |run: &mut Vec<u64>, value: FiltrationWeight, out: &mut Vec<FilteredSimplex>| {
        if run.len() > 1 {
            run.sort_unstable();
        }
        for &shape in run.iter() {
            out.push(unpack_shape(shape, value));
        }
        run.clear();
    };

    for &key in &ws.order {
        let e = &edges[key as u64 as usize];
        let (c, w) = WeightedDigraph::member_witness(e, kind);
        if e.weight != run_value {
            flush(run, run_value, &mut out);
            run_value = e.weight;
        }
        if !ws.vertex_seen[c] {
            ws.vertex_seen[c] = true;
            run.push(pack_shape(&[c]));
        }
        let earlier = &ws.arrived[ws.start[w]..ws.filled[w]];
        for (j, &b) in earlier.iter().enumerate() {
            let pair = sorted2(b, c);
            let shape = pack_shape(&pair);
            if seen.insert(&pair, shape) {
                run.push(shape);
            }
            for &a in &earlier[..j] {
                let triple = sorted3(a, b, c);
                let shape = pack_shape(&triple);
                if seen.insert(&triple, shape) {
                    run.push(shape);
                }
            }
        }
        ws.arrived[ws.filled[w]] = c;
        ws.filled[w] += 1;
    }
    flush(run, run_value, &mut out);
    out
}

#[inline]
fn sorted2(a: usize, b: usize) -> [usize; 2] {
    if a < b {
        [a, b]
    } else {
        [b, a]
    }
}

#[inline]
fn sorted3(a: usize, b: usize, c: usize) -> [usize; 3] {
    let (a, b) = if a < b { (a, b) } else { (b, a) };
    if c < a {
        [c, a, b]
    } else if c < b {
        [a, c, b]
    } else {
        [a, b, c]
    }
}

impl DowkerSkeleton {
    pub fn build(g: &WeightedDigraph, kind: Kind) -> Self {
        Self::build_with(g, kind, SkeletonOptions::default())
            .expect("uncapped skeleton construction cannot fail")
    }

    pub fn build_with(g: &WeightedDigraph, kind: Kind, opts: SkeletonOptions) -> Result<Self> {
        let mut ws = BUILD_SCRATCH.take();
        let out = Self::build_in(g, kind, opts, &mut ws);
        BUILD_SCRATCH.set(ws);
        out
    }

    fn build_in(
        g: &WeightedDigraph,
        kind: Kind,
        opts: SkeletonOptions,
        ws: &mut BuildScratch,
    ) -> Result<Self> {
        bucket_offsets(g, kind, &mut ws.start);
        let work = candidate_work(&ws.start);
        if let Some(cap) = opts.work_cap {
            if work > cap {
                return Err(Error::WorkCapExceeded { cap });
            }
        }
        if !opts.parallel && g.node_count() <= PACKED_ID_LIMIT {
            let simplices = ordered_skeleton(g, kind, ws, g.node_count() + work.min(LIST_WORK_MAX));
            return Ok(DowkerSkeleton { kind, simplices });
        }

        ws.lists.fill(g, kind);
        ws.vertex_min.clear();
        ws.vertex_min.resize(g.node_count(), None);
        for e in g.edges() {
            let (member, _) = WeightedDigraph::member_witness(e, kind);
            let slot = &mut ws.vertex_min[member];
            *slot = Some(slot.map_or(e.weight, |v| v.min(e.weight)));
        }
        let mut simplices: Vec<FilteredSimplex> = ws
            .vertex_min
            .iter()
            .enumerate()
            .filter_map(|(v, w)| w.map(|w| FilteredSimplex::new(&[v], w)))
            .collect();
        let minima = if opts.parallel {
            ws.lists
                .par_iter()
                .fold(Minima::default, |mut acc, members| {
                    acc.visit_witness(members);
                    acc
                })
                .reduce(Minima::default, Minima::merge)
        } else {
            let mut acc = Minima::default();
            for members in ws.lists.iter() {
                acc.visit_witness(members);
            }
            acc
        };
        minima.into_simplices(&mut simplices);
        simplices.sort_unstable_by(FilteredSimplex::filtration_cmp);
        Ok(DowkerSkeleton { kind, simplices })
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn simplices(&self) -> &[FilteredSimplex] {
        &self.simplices
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn count_by_dim(&self) -> [usize; 3] {
        let mut counts = [0; 3];
        for s in &self.simplices {
            counts[s.dim()] += 1;
        }
        counts
    }

    /// The sub-complex of simplices with value `≤ delta`.
    pub fn at(&self, delta: FiltrationWeight) -> DowkerSkeleton {
        let end = self.simplices.partition_point(|s| s.value <= delta);
        DowkerSkeleton {
            kind: self.kind,
            simplices: self.simplices[..end].to_vec(),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("skeleton serializes")
    }
}

pub fn build_skeleton(g: &WeightedDigraph, kind: Kind) -> DowkerSkeleton {
    DowkerSkeleton::build(g, kind)
}

pub fn skeleton_at(sk: &DowkerSkeleton, delta: FiltrationWeight) -> DowkerSkeleton {
    sk.at(delta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn star() -> WeightedDigraph {
        WeightedDigraph::from_edges(5, [(1, 4, 0.1), (2, 4, 0.2), (3, 4, 0.3)]).unwrap()
    }

    fn listing(sk: &DowkerSkeleton) -> Vec<(Vec<usize>, f64)> {
        sk.simplices()
            .iter()
            .map(|s| (s.vertices().to_vec(), s.value().get()))
            .collect()
    }

    #[test]
    fn sink_star() {
        let sk = build_skeleton(&star(), Kind::Sink);
        assert_eq!(
            listing(&sk),
            vec![
                (vec![1], 0.1),
                (vec![2], 0.2),
                (vec![1, 2], 0.2),
                (vec![3], 0.3),
                (vec![1, 3], 0.3),
                (vec![2, 3], 0.3),
                (vec![1, 2, 3], 0.3),
            ]
        );
    }

    #[test]
    fn source_star() {
        let sk = build_skeleton(&star(), Kind::Source);
        assert_eq!(listing(&sk), vec![(vec![4], 0.1)]);
    }

    #[test]
    fn no_shared_target_means_no_pairs() {
        let g = WeightedDigraph::from_edges(4, [(0, 1, 0.7), (2, 3, 0.4)]).unwrap();
        let sk = build_skeleton(&g, Kind::Sink);
        assert_eq!(listing(&sk), vec![(vec![2], 0.4), (vec![0], 0.7)]);
    }

    #[test]
    fn thresholds() {
        let sk = build_skeleton(&star(), Kind::Sink);
        let w = |x| FiltrationWeight::new(x).unwrap();
        assert_eq!(listing(&sk.at(w(0.15))), vec![(vec![1], 0.1)]);
        assert_eq!(
            listing(&sk.at(w(0.2))),
            vec![(vec![1], 0.1), (vec![2], 0.2), (vec![1, 2], 0.2)]
        );
        assert_eq!(sk.at(FiltrationWeight::ONE), sk);
    }

    #[test]
    fn minimum_over_witnesses() {
        // {0,1} witnessed by 2 at max(0.9, 0.8) and by 3 at max(0.3, 0.5)
        let g =
            WeightedDigraph::from_edges(4, [(0, 2, 0.9), (1, 2, 0.8), (0, 3, 0.3), (1, 3, 0.5)])
                .unwrap();
        let sk = build_skeleton(&g, Kind::Sink);
        let pair = sk.simplices().iter().find(|s| s.dim() == 1).unwrap();
        assert_eq!(pair.value().get(), 0.5);
    }

    #[test]
    fn work_cap() {
        let opts = SkeletonOptions {
            work_cap: Some(3),
            parallel: false,
        };
        // one witness of in-degree 3: 3 pairs + 1 triple
        assert!(matches!(
            DowkerSkeleton::build_with(&star(), Kind::Sink, opts),
            Err(Error::WorkCapExceeded { cap: 3 })
        ));
        let opts = SkeletonOptions {
            work_cap: Some(4),
            parallel: false,
        };
        assert!(DowkerSkeleton::build_with(&star(), Kind::Sink, opts).is_ok());
    }

    #[test]
    fn json_roundtrip() {
        let sk = build_skeleton(&star(), Kind::Sink);
        let text = serde_json::to_string(&sk).unwrap();
        assert!(text.starts_with(r#"{"kind":"sink","simplices":[{"v":[1],"value":0.1,"dim":0}"#));
        let back: DowkerSkeleton = serde_json::from_str(&text).unwrap();
        assert_eq!(back, sk);
    }
}
