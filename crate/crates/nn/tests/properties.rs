use dowker_core::{build_line_graphs, WeightedDigraph};
use dowker_nn::model::{embed, Bound};
use dowker_nn::tape::Tape;
use dowker_nn::{init_features, predict, sslgnn_forward, GraphInput, ModelConfig, ModelState};
use ndarray::{s, Array2};
use proptest::prelude::*;

fn digraph(max_nodes: usize, max_edges: usize) -> impl Strategy<Value = WeightedDigraph> {
    (3..=max_nodes).prop_flat_map(move |n| {
        proptest::collection::btree_map((0..n, 0..n), 0u8..=10, 1..=max_edges).prop_filter_map(
            "need a non-loop edge",
            move |m| {
                let edges: Vec<_> = m
                    .into_iter()
                    .filter(|((a, b), _)| a != b)
                    .map(|((a, b), w)| (a, b, w as f64 / 10.0))
                    .collect();
                WeightedDigraph::from_edges(n, edges).ok()
            },
        )
    })
}

fn config(seed: u64) -> ModelConfig {
    ModelConfig {
        hidden: 8,
        layers: 2,
        seed,
        ..ModelConfig::default()
    }
}

fn embeddings(ms: &ModelState, g: &WeightedDigraph) -> Array2<f64> {
    let (so, si) = build_line_graphs(g);
    sslgnn_forward(ms, &so, &si, &init_features(g)).unwrap()
}

fn max_abs_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    assert_eq!(a.dim(), b.dim());
    (a - b).mapv(f64::abs).fold(0.0, |m, &x| m.max(x))
}

fn sorted(mut pts: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    pts.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
    pts
}

fn close_points(a: Vec<(f64, f64)>, b: Vec<(f64, f64)>) -> bool {
    let (a, b) = (sorted(a), sorted(b));
    a.len() == b.len()
        && a.iter()
            .zip(&b)
            .all(|(p, q)| (p.0 - q.0).abs() < 1e-12 && (p.1 - q.1).abs() < 1e-12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn permutation_equivariance(g in digraph(8, 20), seed in 0u64..1000, shuffle in any::<u64>()) {
        use rand::{seq::SliceRandom, SeedableRng};
        let ms = ModelState::new(config(seed)).unwrap();
        let mut perm: Vec<usize> = (0..g.edge_count()).collect();
        perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(shuffle));
        let gp = g.permuted(&perm);
        let h = embeddings(&ms, &g);
        let hp = embeddings(&ms, &gp);
        for (i, &old) in perm.iter().enumerate() {
            let d = (&hp.row(i) - &h.row(old)).mapv(f64::abs).fold(0.0f64, |m, &x| m.max(x));
            prop_assert!(d < 1e-12);
        }
        let a = predict(&ms, &GraphInput::new(&g));
        let b = predict(&ms, &GraphInput::new(&gp));
        prop_assert!(a.scores.iter().zip(&b.scores).all(|(x, y)| (x - y).abs() < 1e-12));
        prop_assert!(close_points(a.pd0, b.pd0));
        prop_assert!(close_points(a.pd1, b.pd1));
    }

    #[test]
    fn branch_symmetry(g in digraph(8, 20), seed in 0u64..1000) {
        let ms = ModelState::new(config(seed)).unwrap();
        let h = embeddings(&ms, &g);
        let hr = embeddings(&ms.swapped_branches(), &g.reversed());
        prop_assert!(max_abs_diff(&h, &hr) < 1e-12);
    }

    #[test]
    fn cardinality_and_range(g in digraph(9, 25), seed in 0u64..1000) {
        let ms = ModelState::new(config(seed)).unwrap();
        let p = predict(&ms, &GraphInput::new(&g));
        prop_assert_eq!(p.pd0.len(), g.edge_count());
        prop_assert_eq!(p.pd1.len(), g.edge_count());
        prop_assert_eq!(p.scores.len(), 2);
        for &(b, d) in p.pd0.iter().chain(&p.pd1) {
            prop_assert!((0.0..=1.0).contains(&b) && b <= d && d <= 1.0);
        }
    }
}

#[test]
fn zero_weights_give_zero_embeddings() {
    let g = WeightedDigraph::from_edges(4, [(0, 1, 0.3), (1, 2, 1.0), (2, 0, 0.0), (3, 0, 0.6)])
        .unwrap();
    let ms = ModelState::zeros(config(0)).unwrap();
    let h = embeddings(&ms, &g);
    assert!(h.iter().all(|&x| x == 0.0));
    let p = predict(&ms, &GraphInput::new(&g));
    assert!(p.pd0.iter().all(|&x| x == (0.5, 0.5)));
}

/// Without shared endpoints the neighbour sums vanish and every layer is a
/// per-row composition of the self and fusion transforms.
#[test]
fn no_line_graph_edges_closed_form() {
    let g = WeightedDigraph::from_edges(6, [(0, 1, 0.0), (2, 3, 0.25), (4, 5, 1.0)]).unwrap();
    let (so, si) = build_line_graphs(&g);
    assert_eq!((so.edge_count(), si.edge_count()), (0, 0));
    let cfg = config(11);
    let ms = ModelState::new(cfg).unwrap();
    let relu = |x: Array2<f64>| x.mapv(|v| v.max(0.0));
    let p = |name: &str| ms.param(name).unwrap().clone();
    let mut h = init_features(&g);
    for m in 0..cfg.layers {
        let h_so = relu(h.dot(&p(&format!("layer{m}.so.self"))) + p(&format!("layer{m}.so.bias")));
        let h_si = relu(h.dot(&p(&format!("layer{m}.si.self"))) + p(&format!("layer{m}.si.bias")));
        let f = p(&format!("layer{m}.fuse"));
        let d = cfg.hidden;
        h = relu(
            h_so.dot(&f.slice(s![..d, ..]))
                + h_si.dot(&f.slice(s![d.., ..]))
                + p(&format!("layer{m}.fuse.bias")),
        );
    }
    assert!(max_abs_diff(&h, &embeddings(&ms, &g)) < 1e-14);
}

#[test]
fn isolated_edge_pd1_is_constant() {
    let g = WeightedDigraph::from_edges(6, [(0, 1, 0.0), (2, 3, 0.25), (4, 5, 1.0)]).unwrap();
    let ms = ModelState::new(config(4)).unwrap();
    let p = predict(&ms, &GraphInput::new(&g));
    assert!(p.pd1.iter().all(|&x| x == p.pd1[0]));
}

#[test]
fn embeddings_do_not_depend_on_tape_reuse() {
    let g = WeightedDigraph::from_edges(3, [(0, 1, 0.2), (1, 2, 0.4), (0, 2, 0.9)]).unwrap();
    let ms = ModelState::new(config(8)).unwrap();
    let input = GraphInput::new(&g);
    let mut tape = Tape::new();
    let bound = Bound::new(&ms, &mut tape);
    let a = embed(&ms, &bound, &mut tape, &input);
    let b = embed(&ms, &bound, &mut tape, &input);
    assert_eq!(tape.value(a), tape.value(b));
    assert_eq!(tape.value(a), &embeddings(&ms, &g));
}
