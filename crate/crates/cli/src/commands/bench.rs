use std::time::Instant;

use dowker_core::synth::{generate, Family, GeneratorSpec};
use dowker_core::{diagrams, naive_oracle_pd, Kind, TemporalDigraph, WeightedDigraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::settings::Settings;

#[derive(clap::Args, Debug, Clone)]
pub struct BenchArgs {
    /// Small graphs timed against the naive oracle
    #[arg(long, default_value_t = 50)]
    pub graphs: usize,
    /// Nodes per small graph
    #[arg(long, default_value_t = 10)]
    pub nodes: usize,
    /// Edges in the large timing graph
    #[arg(long, default_value_t = 1000)]
    pub large_edges: usize,
    /// Nodes in the large timing graph
    #[arg(long, default_value_t = 200)]
    pub large_nodes: usize,
    /// In-degree cap of the large timing graph
    #[arg(long, default_value_t = 30)]
    pub max_in_degree: usize,
    /// Timed rounds per path after one warm-up round; the fastest counts
    #[arg(long, default_value_t = 20)]
    pub repeats: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct SmallBench {
    pub graphs: usize,
    pub nodes: usize,
    pub edges: usize,
    /// Graphs whose fast and naive diagrams agree exactly.
    pub agree: usize,
    pub repeats: usize,
    /// Fastest round over all small graphs.
    pub fast_ms: f64,
    pub naive_ms: f64,
    pub speedup: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LargeBench {
    pub nodes: usize,
    pub edges: usize,
    pub max_in_degree: usize,
    pub pd0_points: usize,
    pub pd1_points: usize,
    pub ms: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchReport {
    pub small: SmallBench,
    pub large: LargeBench,
}

/// Random digraph with exactly `edges` distinct edges and no node receiving
/// more than `cap` of them; timestamps uniform in `[0, 1000)`.
pub fn bounded_in_degree(
    nodes: usize,
    edges: usize,
    cap: usize,
    seed: u64,
) -> Result<TemporalDigraph> {
    if nodes < 2 || edges > nodes * cap.min(nodes - 1) {
        return Err(CliError::Usage(format!(
            "{edges} edges do not fit on {nodes} nodes with in-degree <= {cap}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut indeg = vec![0usize; nodes];
    let mut seen = std::collections::HashSet::with_capacity(edges);
    let mut raw = Vec::with_capacity(edges);
    while raw.len() < edges {
        let (a, b) = (rng.gen_range(0..nodes), rng.gen_range(0..nodes));
        if a == b || indeg[b] >= cap || !seen.insert((a, b)) {
            continue;
        }
        indeg[b] += 1;
        raw.push((a, b, rng.gen_range(0.0..1000.0)));
    }
    Ok(TemporalDigraph::from_edges(nodes, raw)?)
}

fn elapsed_ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Runs `f` once untimed, then `repeats` timed rounds; returns the last
/// result and the fastest round in milliseconds.
fn fastest<T>(repeats: usize, mut f: impl FnMut() -> T) -> (T, f64) {
    let mut out = f();
    let mut best = f64::INFINITY;
    for _ in 0..repeats {
        let t = Instant::now();
        out = f();
        best = best.min(elapsed_ms(t));
    }
    (out, best)
}

pub fn bench(args: &BenchArgs, s: &Settings) -> Result<BenchReport> {
    if args.graphs == 0 || args.repeats == 0 {
        return Err(CliError::Usage(
            "--graphs and --repeats must be positive".into(),
        ));
    }
    let spec = GeneratorSpec::new(
        Family::RandomTemporal {
            nodes: (args.nodes, args.nodes),
            edges: (args.nodes, 3 * args.nodes),
        },
        args.graphs,
        s.seed(),
    );
    let small: Vec<WeightedDigraph> = generate(&spec)?.iter().map(|g| g.normalize()).collect();

    let (fast, fast_ms) = fastest(args.repeats, || {
        small
            .iter()
            .map(|g| diagrams(g, Kind::Sink))
            .collect::<Vec<_>>()
    });
    let (naive, naive_ms) = fastest(args.repeats, || {
        small
            .iter()
            .map(|g| naive_oracle_pd(g, Kind::Sink))
            .collect::<std::result::Result<Vec<_>, _>>()
    });
    let naive = naive?;
    let agree = fast
        .iter()
        .zip(&naive)
        .filter(|((f0, f1), (n0, n1))| f0.multiset_eq(n0) && f1.multiset_eq(n1))
        .count();
    if agree != small.len() {
        return Err(CliError::Invariant(format!(
            "fast and naive diagrams differ on {} of {} graphs",
            small.len() - agree,
            small.len()
        )));
    }

    let big = bounded_in_degree(
        args.large_nodes,
        args.large_edges,
        args.max_in_degree,
        s.seed(),
    )?;
    let mut indeg = vec![0usize; big.node_count()];
    big.edges().iter().for_each(|e| indeg[e.target] += 1);
    let t = Instant::now();
    let (pd0, pd1) = diagrams(&big.normalize(), Kind::Sink);
    let large_ms = elapsed_ms(t);

    Ok(BenchReport {
        small: SmallBench {
            graphs: small.len(),
            nodes: args.nodes,
            edges: small.iter().map(|g| g.edge_count()).sum(),
            agree,
            repeats: args.repeats,
            fast_ms,
            naive_ms,
            speedup: naive_ms / fast_ms.max(1e-9),
        },
        large: LargeBench {
            nodes: big.node_count(),
            edges: big.edge_count(),
            max_in_degree: indeg.into_iter().max().unwrap_or(0),
            pd0_points: pd0.len(),
            pd1_points: pd1.len(),
            ms: large_ms,
        },
    })
}
