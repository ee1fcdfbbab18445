//! Seeded synthetic graph families.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::TemporalDigraph;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// Uniformly random ordered pairs with uniform timestamps in `[0, 1000)`.
    /// Node and edge counts are drawn from the inclusive ranges.
    RandomTemporal {
        nodes: (usize, usize),
        edges: (usize, usize),
    },
    /// Random recursive tree: each new node attaches to a uniformly chosen
    /// earlier node, strictly after that node was reached.
    DiffusionTree { nodes: (usize, usize) },
    /// The three 5-node cascades that differ by one timestamp swap and by
    /// one edge reversal.
    Fig1bTriple,
    /// `k` nodes feeding one sink at times 0.1, 0.2, ...
    Star { k: usize },
    /// `k` members chained in a ring through `k` private witnesses.
    Cycle { k: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    #[serde(flatten)]
    pub family: Family,
    #[serde(default = "one")]
    pub count: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub label: Option<i64>,
}

fn one() -> usize {
    1
}

impl GeneratorSpec {
    pub fn new(family: Family, count: usize, seed: u64) -> Self {
        GeneratorSpec {
            family,
            count,
            seed,
            label: None,
        }
    }

    pub fn with_label(mut self, label: i64) -> Self {
        self.label = Some(label);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        let range_ok = |(lo, hi): (usize, usize)| lo >= 2 && lo <= hi;
        match &self.family {
            Family::RandomTemporal { nodes, edges } => {
                if !range_ok(*nodes) {
                    return bad(format!("node range {nodes:?} must satisfy 2 <= lo <= hi"));
                }
                if edges.0 == 0 || edges.0 > edges.1 {
                    return bad(format!("edge range {edges:?} must satisfy 1 <= lo <= hi"));
                }
                if edges.0 > nodes.1 * (nodes.1 - 1) {
                    return bad(format!("{} edges cannot fit on {} nodes", edges.0, nodes.1));
                }
            }
            Family::DiffusionTree { nodes } => {
                if !range_ok(*nodes) {
                    return bad(format!("node range {nodes:?} must satisfy 2 <= lo <= hi"));
                }
            }
            Family::Star { k } | Family::Cycle { k } if *k == 0 => {
                return bad("k must be positive".into());
            }
            Family::Cycle { k } if *k < 2 => {
                return bad("a cycle needs k >= 2".into());
            }
            _ => {}
        }
        if self.count == 0 {
            return bad("count must be positive".into());
        }
        Ok(())
    }
}

/// Mixes the seed with the sample index so samples are independent of
/// `count`.
fn sample_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn random_temporal(
    rng: &mut ChaCha8Rng,
    nodes: (usize, usize),
    edges: (usize, usize),
) -> TemporalDigraph {
    let n = rng.gen_range(nodes.0..=nodes.1);
    let max_edges = n * (n - 1);
    let e = rng.gen_range(edges.0..=edges.1).min(max_edges);
    let mut chosen = std::collections::HashSet::with_capacity(e);
    let mut raw = Vec::with_capacity(e);
    if e * 2 > max_edges {
        let mut all: Vec<(usize, usize)> = (0..n)
            .flat_map(|a| (0..n).filter(move |&b| b != a).map(move |b| (a, b)))
            .collect();
        all.shuffle(rng);
        all.truncate(e);
        raw.extend(
            all.into_iter()
                .map(|(a, b)| (a, b, rng.gen_range(0.0..1000.0))),
        );
    } else {
        while raw.len() < e {
            let a = rng.gen_range(0..n);
            let b = rng.gen_range(0..n);
            if a != b && chosen.insert((a, b)) {
                raw.push((a, b, rng.gen_range(0.0..1000.0)));
            }
        }
    }
    TemporalDigraph::from_edges(n, raw).expect("generator emits valid edges")
}

fn diffusion_tree(rng: &mut ChaCha8Rng, nodes: (usize, usize)) -> TemporalDigraph {
    let n = rng.gen_range(nodes.0..=nodes.1);
    let mut reached = vec![0.0f64; n];
    let mut raw = Vec::with_capacity(n - 1);
    for child in 1..n {
        let parent = rng.gen_range(0..child);
        let t = reached[parent] + rng.gen_range(1.0..100.0);
        reached[child] = t;
        raw.push((parent, child, t));
    }
    TemporalDigraph::from_edges(n, raw).expect("generator emits valid edges")
}

/// `G_a`: node 0 reaches 1, 2, 3 at times 1, 2, 3 and node 1 reaches 4 at
/// time 4. `G_b` swaps the timestamps of `0→2` and `1→4`. `G_c` reverses
/// `0→3`. Undirected, all three carry the same multiset of lightest
/// incident weights.
pub fn fig1b_triple() -> [TemporalDigraph; 3] {
    let ga = [(0, 1, 1.0), (0, 2, 2.0), (0, 3, 3.0), (1, 4, 4.0)];
    let gb = [(0, 1, 1.0), (0, 2, 4.0), (0, 3, 3.0), (1, 4, 2.0)];
    let gc = [(0, 1, 1.0), (0, 2, 2.0), (3, 0, 3.0), (1, 4, 4.0)];
    [ga, gb, gc].map(|edges| TemporalDigraph::from_edges(5, edges).expect("fixture is valid"))
}

/// Nodes `1..=k` each point at node `k + 1`; edge `i` has time `i / 10`.
pub fn star(k: usize) -> TemporalDigraph {
    TemporalDigraph::from_edges(k + 2, (1..=k).map(|i| (i, k + 1, i as f64 / 10.0)))
        .expect("fixture is valid")
}

/// Members `0..k` and witnesses `k..2k`: witness `k + i` is reached from
/// members `i` and `(i + 1) mod k` at time `i + 1`.
pub fn cycle(k: usize) -> TemporalDigraph {
    let raw = (0..k).flat_map(|i| {
        let t = (i + 1) as f64;
        [(i, k + i, t), ((i + 1) % k, k + i, t)]
    });
    TemporalDigraph::from_edges(2 * k, raw).expect("fixture is valid")
}

pub fn generate(spec: &GeneratorSpec) -> Result<Vec<TemporalDigraph>> {
    spec.validate()?;
    let graphs: Vec<TemporalDigraph> = match &spec.family {
        Family::Fig1bTriple => fig1b_triple().to_vec(),
        Family::Star { k } => vec![star(*k); spec.count],
        Family::Cycle { k } => vec![cycle(*k); spec.count],
        Family::RandomTemporal { nodes, edges } => (0..spec.count)
            .map(|i| random_temporal(&mut sample_rng(spec.seed, i), *nodes, *edges))
            .collect(),
        Family::DiffusionTree { nodes } => (0..spec.count)
            .map(|i| diffusion_tree(&mut sample_rng(spec.seed, i), *nodes))
            .collect(),
    };
    Ok(graphs
        .into_iter()
        .map(|g| g.with_label(spec.label))
        .collect())
}

/// Two-class benchmark: diffusion trees labelled 0 interleaved with random
/// temporal digraphs labelled 1, on the same node range and with roughly
/// one and a half edges per node for the random class.
pub fn classification_benchmark(
    count: usize,
    nodes: (usize, usize),
    seed: u64,
) -> Vec<TemporalDigraph> {
    let trees = generate(
        &GeneratorSpec::new(Family::DiffusionTree { nodes }, count.div_ceil(2), seed).with_label(0),
    )
    .expect("valid spec");
    let randoms = generate(
        &GeneratorSpec::new(
            Family::RandomTemporal {
                nodes,
                edges: (nodes.0, nodes.1 * 3 / 2),
            },
            count / 2,
            seed.wrapping_add(1),
        )
        .with_label(1),
    )
    .expect("valid spec");
    let mut out = Vec::with_capacity(count);
    let mut t = trees.into_iter();
    let mut r = randoms.into_iter();
    for i in 0..count {
        let g = if i % 2 == 0 { t.next() } else { r.next() };
        out.extend(g);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_is_deterministic() {
        let spec = GeneratorSpec::new(
            Family::RandomTemporal {
                nodes: (40, 40),
                edges: (120, 120),
            },
            3,
            11,
        );
        let a = generate(&spec).unwrap();
        assert_eq!(a, generate(&spec).unwrap());
        assert_eq!(a[0].node_count(), 40);
        assert_eq!(a[0].edge_count(), 120);
        assert_ne!(a[0], a[1]);
    }

    #[test]
    fn dense_random_graph() {
        let spec = GeneratorSpec::new(
            Family::RandomTemporal {
                nodes: (4, 4),
                edges: (12, 12),
            },
            1,
            1,
        );
        assert_eq!(generate(&spec).unwrap()[0].edge_count(), 12);
    }

    #[test]
    fn tree_shape() {
        let spec = GeneratorSpec::new(Family::DiffusionTree { nodes: (10, 20) }, 5, 3);
        for g in generate(&spec).unwrap() {
            assert_eq!(g.edge_count(), g.node_count() - 1);
            let mut indeg = vec![0; g.node_count()];
            for e in g.edges() {
                indeg[e.target] += 1;
            }
            assert_eq!(indeg[0], 0);
            assert!(indeg[1..].iter().all(|&d| d == 1));
        }
    }

    #[test]
    fn triple_differs_as_described() {
        let [a, b, c] = fig1b_triple();
        let diff = |x: &TemporalDigraph, y: &TemporalDigraph| {
            x.edges()
                .iter()
                .zip(y.edges())
                .filter(|(p, q)| p != q)
                .count()
        };
        assert_eq!(diff(&a, &b), 2);
        assert_eq!(diff(&a, &c), 1);
        let ta: Vec<f64> = a.edges().iter().map(|e| e.time).collect();
        let mut tb: Vec<f64> = b.edges().iter().map(|e| e.time).collect();
        tb.sort_by(f64::total_cmp);
        assert_eq!(ta, tb);
        assert_eq!((c.edges()[2].source, c.edges()[2].target), (3, 0));
    }

    #[test]
    fn star_fixture() {
        let g = star(3);
        let e: Vec<_> = g.edges().iter().map(|e| (e.source, e.target)).collect();
        assert_eq!(e, vec![(1, 4), (2, 4), (3, 4)]);
    }

    #[test]
    fn benchmark_alternates_labels() {
        let gs = classification_benchmark(10, (8, 12), 5);
        assert_eq!(gs.len(), 10);
        for (i, g) in gs.iter().enumerate() {
            assert_eq!(g.label, Some((i % 2) as i64));
        }
    }

    #[test]
    fn spec_json() {
        let spec: GeneratorSpec =
            serde_json::from_str(r#"{"family":"star","k":3,"seed":4}"#).unwrap();
        assert_eq!(spec.family, Family::Star { k: 3 });
        assert_eq!(spec.count, 1);
        assert!(
            GeneratorSpec::new(Family::DiffusionTree { nodes: (5, 2) }, 1, 0)
                .validate()
                .is_err()
        );
    }
}
