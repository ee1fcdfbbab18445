use dowker_core::metrics::*;
use dowker_core::*;
use proptest::prelude::*;

fn diagram() -> impl Strategy<Value = PersistenceDiagram> {
    prop::collection::vec((0.0f64..1.0, 0.0f64..1.0, prop::bool::weighted(0.15)), 0..8).prop_map(
        |pts| {
            PersistenceDiagram::new(
                0,
                pts.into_iter()
                    .map(|(a, b, inf)| {
                        let (lo, hi) = (a.min(b), a.max(b));
                        let lo = FiltrationWeight::new(lo).unwrap();
                        if inf {
                            PdPoint::essential(lo)
                        } else {
                            PdPoint::finite(lo, FiltrationWeight::new(hi).unwrap())
                        }
                    })
                    .collect(),
            )
        },
    )
}

fn d(a: &PersistenceDiagram, b: &PersistenceDiagram) -> f64 {
    wasserstein2(a, b).unwrap().distance
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn metric_axioms(a in diagram(), b in diagram(), c in diagram()) {
        prop_assert_eq!(d(&a, &a), 0.0);
        prop_assert_eq!(d(&a, &b), d(&b, &a));
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-9);
    }

    #[test]
    fn diagonal_points_are_free(a in diagram(), b in diagram(), x in 0.0f64..1.0) {
        let mut a2 = a.clone();
        let x = FiltrationWeight::new(x).unwrap();
        a2.points.push(PdPoint::finite(x, x));
        prop_assert_eq!(d(&a2, &b), d(&a, &b));
    }

    #[test]
    fn optimal_beats_random_matchings(a in diagram(), b in diagram(), seed in any::<u64>()) {
        use rand::{seq::SliceRandom, SeedableRng};
        let pa = a.capped(1.0);
        let pb = b.capped(1.0);
        let (best, _) = optimal_matching(&pa, &pb);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        // random perfect matching on the augmented sets
        let mut cols: Vec<usize> = (0..pa.len() + pb.len()).collect();
        cols.shuffle(&mut rng);
        let pairs = cols.iter().enumerate().filter_map(|(r, &c)| {
            let l = if r < pa.len() { Slot::Point(r) } else { Slot::Diagonal };
            let rt = if c < pb.len() { Slot::Point(c) } else { Slot::Diagonal };
            (l != Slot::Diagonal || rt != Slot::Diagonal).then_some((l, rt))
        }).collect();
        let cost = matching_cost(&pa, &pb, &Matching { pairs });
        prop_assert!(best <= cost + 1e-12);
    }

    #[test]
    fn image_is_additive(a in diagram(), b in diagram()) {
        let cfg = ImageConfig::default();
        let mut union = a.clone();
        union.points.extend(b.points.iter().copied());
        let ia = persistence_image(&a, &cfg).unwrap();
        let ib = persistence_image(&b, &cfg).unwrap();
        let iu = persistence_image(&union, &cfg).unwrap();
        for k in 0..iu.pixels.len() {
            prop_assert!(iu.pixels[k] >= 0.0);
            prop_assert!((iu.pixels[k] - ia.pixels[k] - ib.pixels[k]).abs() < 1e-12);
        }
    }
}

#[test]
fn star_pie_against_positive_variant() {
    let g = WeightedDigraph::from_edges(5, [(1, 4, 0.1), (2, 4, 0.2), (3, 4, 0.3)]).unwrap();
    let (pd0, _) = diagrams(&g, Kind::Sink);
    let cfg = ImageConfig::default();
    let raw = persistence_image(&pd0, &cfg).unwrap();
    let pos = persistence_image(&pd0.positive(), &cfg).unwrap();
    // diagonal points carry zero weight, so the images coincide
    assert_eq!(pie(&raw, &pos).unwrap(), 0.0);
    // and the essential point (0.1, cap 1.0) matches a hand-built diagram
    let hand = PersistenceDiagram::new(
        0,
        vec![PdPoint::finite(
            FiltrationWeight::new(0.1).unwrap(),
            FiltrationWeight::ONE,
        )],
    );
    assert_eq!(
        pie(&raw, &persistence_image(&hand, &cfg).unwrap()).unwrap(),
        0.0
    );
}
