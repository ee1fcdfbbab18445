mod common;

use std::collections::HashMap;

use dowker_core::dowker::SkeletonOptions;
use dowker_core::*;
use proptest::prelude::*;

fn values(sk: &DowkerSkeleton) -> HashMap<Vec<usize>, f64> {
    sk.simplices()
        .iter()
        .map(|s| (s.vertices().to_vec(), s.value().get()))
        .collect()
}

/// Direct min-max evaluation of a member set over every witness.
fn brute_value(g: &WeightedDigraph, kind: Kind, members: &[usize]) -> Option<f64> {
    (0..g.node_count())
        .filter_map(|w| {
            members
                .iter()
                .map(|&b| {
                    g.edges().iter().find_map(|e| {
                        let (m, wit) = match kind {
                            Kind::Sink => (e.source, e.target),
                            Kind::Source => (e.target, e.source),
                        };
                        (m == b && wit == w).then_some(e.weight.get())
                    })
                })
                .collect::<Option<Vec<f64>>>()
                .map(|ws| ws.into_iter().fold(0.0, f64::max))
        })
        .reduce(f64::min)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn faces_precede_cofaces(g in common::digraph(9, 30), sink in any::<bool>()) {
        let kind = if sink { Kind::Sink } else { Kind::Source };
        let sk = build_skeleton(&g, kind);
        let vals = values(&sk);
        for pair in sk.simplices().windows(2) {
            prop_assert!(pair[0].filtration_cmp(&pair[1]).is_lt());
        }
        for s in sk.simplices() {
            let v = s.vertices();
            if v.len() < 2 { continue; }
            for skip in 0..v.len() {
                let face: Vec<usize> = v.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &x)| x).collect();
                let fv = vals.get(&face).copied();
                prop_assert!(fv.is_some(), "missing face {:?}", face);
                prop_assert!(fv.unwrap() <= s.value().get());
            }
        }
    }

    #[test]
    fn values_are_min_over_witnesses_of_max(g in common::digraph(7, 20), sink in any::<bool>()) {
        let kind = if sink { Kind::Sink } else { Kind::Source };
        let sk = build_skeleton(&g, kind);
        let vals = values(&sk);
        let n = g.node_count();
        for a in 0..n {
            let mut sets = vec![vec![a]];
            for b in a + 1..n {
                sets.push(vec![a, b]);
                for c in b + 1..n {
                    sets.push(vec![a, b, c]);
                }
            }
            for s in sets {
                prop_assert_eq!(vals.get(&s).copied(), brute_value(&g, kind, &s), "simplex {:?}", s);
            }
        }
    }

    #[test]
    fn thresholds_are_nested(g in common::digraph(9, 30), d1 in 0u8..=10, d2 in 0u8..=10) {
        let sk = build_skeleton(&g, Kind::Sink);
        let (lo, hi) = (d1.min(d2), d1.max(d2));
        let w = |x: u8| FiltrationWeight::new(f64::from(x) / 10.0).unwrap();
        let small = sk.at(w(lo));
        let big = sk.at(w(hi));
        let bigset = values(&big);
        for s in small.simplices() {
            prop_assert!(s.value() <= w(lo));
            prop_assert!(bigset.contains_key(s.vertices()));
        }
    }

    #[test]
    fn pairs_correspond_to_line_graph_adjacency(g in common::digraph(9, 30)) {
        let sk = build_skeleton(&g, Kind::Sink);
        let (_, si) = build_line_graphs(&g);
        let vals = values(&sk);
        let n = g.node_count();
        for u in 0..n {
            for v in u + 1..n {
                let via_line_graph = si.edges().any(|(a, b)| {
                    let (ea, eb) = (&g.edges()[a], &g.edges()[b]);
                    (ea.source == u && eb.source == v) || (ea.source == v && eb.source == u)
                });
                prop_assert_eq!(vals.contains_key(&vec![u, v]), via_line_graph);
            }
        }
    }

    #[test]
    fn parallel_build_matches_sequential(g in common::digraph(12, 60), sink in any::<bool>()) {
        let kind = if sink { Kind::Sink } else { Kind::Source };
        let seq = build_skeleton(&g, kind);
        let par = DowkerSkeleton::build_with(&g, kind, SkeletonOptions { work_cap: None, parallel: true }).unwrap();
        prop_assert_eq!(serde_json::to_string(&seq).unwrap(), serde_json::to_string(&par).unwrap());
    }

    #[test]
    fn reversal_swaps_kinds(g in common::digraph(9, 30)) {
        let sink = build_skeleton(&g, Kind::Sink);
        let source = build_skeleton(&g.reversed(), Kind::Source);
        prop_assert_eq!(sink.simplices(), source.simplices());
    }
}
