#![allow(dead_code)]

use dowker_core::WeightedDigraph;
use proptest::prelude::*;

/// Random weighted digraph with weights drawn from a small grid so that
/// ties are common.
pub fn digraph(max_nodes: usize, max_edges: usize) -> impl Strategy<Value = WeightedDigraph> {
    (2..=max_nodes).prop_flat_map(move |n| {
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|a| (0..n).filter(move |&b| b != a).map(move |b| (a, b)))
            .collect();
        let cap = max_edges.min(pairs.len());
        (
            Just(n),
            proptest::sample::subsequence(pairs, 1..=cap),
            proptest::collection::vec(0u8..=10, cap),
        )
            .prop_map(|(n, chosen, ws)| {
                WeightedDigraph::from_edges(
                    n,
                    chosen
                        .into_iter()
                        .zip(ws)
                        .map(|((a, b), w)| (a, b, f64::from(w) / 10.0)),
                )
                .unwrap()
            })
    })
}
