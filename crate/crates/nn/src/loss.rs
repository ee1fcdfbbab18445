//! Training samples and the joint diagram + label objective.

use std::sync::Arc;

use dowker_core::metrics::optimal_matching;
use dowker_core::{diagrams, Kind, PersistenceDiagram, TemporalDigraph, WeightedDigraph};
use ndarray::Array2;

use crate::error::{NnError, Result};
use crate::model::{forward, Bound, GraphInput, ModelState};
use crate::tape::{Tape, Var};

/// Positive points of `d` with infinite deaths replaced by `cap`; points
/// that land on the diagonal after capping are dropped.
pub fn target_points(d: &PersistenceDiagram, cap: f64) -> Vec<(f64, f64)> {
    d.capped(cap).into_iter().filter(|&(b, d)| d > b).collect()
}

/// One graph with its exact diagrams and optional class.
#[derive(Clone, Debug)]
pub struct Sample {
    pub input: GraphInput,
    pub gt0: Arc<Vec<(f64, f64)>>,
    pub gt1: Arc<Vec<(f64, f64)>>,
    pub label: Option<usize>,
}

impl Sample {
    pub fn new(g: &WeightedDigraph, label: Option<usize>, inf_cap: f64) -> Self {
        let (pd0, pd1) = diagrams(g, Kind::Sink);
        Sample {
            input: GraphInput::new(g),
            gt0: Arc::new(target_points(&pd0, inf_cap)),
            gt1: Arc::new(target_points(&pd1, inf_cap)),
            label,
        }
    }

    /// Normalizes `g` and checks its label against the class count.
    pub fn from_temporal(g: &TemporalDigraph, classes: usize, inf_cap: f64) -> Result<Self> {
        let label = match g.label {
            Some(l) if l < 0 || l as usize >= classes => {
                return Err(NnError::Label { label: l, classes })
            }
            l => l.map(|l| l as usize),
        };
        Ok(Sample::new(&g.normalize(), label, inf_cap))
    }

    pub fn edge_count(&self) -> usize {
        self.input.edge_count()
    }
}

/// `WD²(pred0, gt0) + WD²(pred1, gt1) + λ · CE(scores, label)`. The label
/// term is omitted when `label` is `None`.
#[allow(clippy::too_many_arguments)]
pub fn joint_loss(
    tape: &mut Tape,
    pred0: Var,
    pred1: Var,
    gt0: Arc<Vec<(f64, f64)>>,
    gt1: Arc<Vec<(f64, f64)>>,
    scores: Var,
    label: Option<usize>,
    lambda: f64,
) -> Var {
    let w0 = tape.wd2(pred0, gt0);
    let w1 = tape.wd2(pred1, gt1);
    let mut terms = vec![w0, w1];
    if let Some(l) = label {
        if lambda != 0.0 {
            let ce = tape.cross_entropy(scores, l);
            terms.push(tape.scale(ce, lambda));
        }
    }
    tape.sum(terms)
}

/// Loss of one sample and its gradient for every parameter.
pub fn sample_gradient(ms: &ModelState, s: &Sample, lambda: f64) -> (f64, Vec<Array2<f64>>) {
    let mut tape = Tape::new();
    let bound = Bound::new(ms, &mut tape);
    let out = forward(ms, &bound, &mut tape, &s.input);
    let loss = joint_loss(
        &mut tape,
        out.pd0,
        out.pd1,
        s.gt0.clone(),
        s.gt1.clone(),
        out.scores,
        s.label,
        lambda,
    );
    let grads = tape.backward(loss);
    let g = bound
        .vars
        .iter()
        .zip(&ms.params)
        .map(|(&v, p)| {
            grads
                .get(v)
                .cloned()
                .unwrap_or_else(|| Array2::zeros(p.value.raw_dim()))
        })
        .collect();
    (tape.scalar(loss), g)
}

/// Loss of one sample without gradients.
pub fn sample_loss(ms: &ModelState, s: &Sample, lambda: f64) -> f64 {
    let mut tape = Tape::new();
    let bound = Bound::new(ms, &mut tape);
    let out = forward(ms, &bound, &mut tape, &s.input);
    let loss = joint_loss(
        &mut tape,
        out.pd0,
        out.pd1,
        s.gt0.clone(),
        s.gt1.clone(),
        out.scores,
        s.label,
        lambda,
    );
    tape.scalar(loss)
}

/// Mean loss and mean gradient over a batch, summed in batch order.
pub fn batch_gradient(ms: &ModelState, batch: &[&Sample], lambda: f64) -> (f64, Vec<Array2<f64>>) {
    let mut total = 0.0;
    let mut acc: Vec<Array2<f64>> = ms
        .params
        .iter()
        .map(|p| Array2::zeros(p.value.raw_dim()))
        .collect();
    for s in batch {
        let (l, g) = sample_gradient(ms, s, lambda);
        total += l;
        for (a, g) in acc.iter_mut().zip(g) {
            *a += &g;
        }
    }
    let n = batch.len().max(1) as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    (total / n, acc)
}

pub fn batch_loss(ms: &ModelState, batch: &[&Sample], lambda: f64) -> f64 {
    let total: f64 = batch.iter().map(|s| sample_loss(ms, s, lambda)).sum();
    total / batch.len().max(1) as f64
}

/// 2-Wasserstein distance between raw predicted points and target points.
pub fn point_wd(pred: &[(f64, f64)], target: &[(f64, f64)]) -> f64 {
    optimal_matching(pred, target).0.max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelConfig;
    use ndarray::array;

    #[test]
    fn exact_prediction_leaves_only_label_term() {
        let mut tape = Tape::new();
        let gt0 = Arc::new(vec![(0.0, 0.4), (0.1, 1.0)]);
        let gt1 = Arc::new(vec![]);
        let p0 = tape.leaf(array![[0.0, 0.4], [0.1, 1.0], [0.3, 0.3]]);
        let p1 = tape.leaf(array![[0.2, 0.2]]);
        let scores = tape.leaf(array![[40.0, 0.0]]);
        let l = joint_loss(
            &mut tape,
            p0,
            p1,
            gt0.clone(),
            gt1.clone(),
            scores,
            Some(0),
            1.0,
        );
        let ce = -(40f64 - (40f64.exp() + 1.0).ln());
        assert!((tape.scalar(l) - ce).abs() < 1e-15);
        let l0 = joint_loss(&mut tape, p0, p1, gt0, gt1, scores, Some(1), 0.0);
        assert_eq!(tape.scalar(l0), 0.0);
    }

    #[test]
    fn star_sample_targets() {
        let g = dowker_core::synth::star(3);
        let s = Sample::from_temporal(&g, 2, 1.0).unwrap();
        assert_eq!(s.edge_count(), 3);
        assert!(s.gt1.is_empty());
        assert!(s.gt0.iter().all(|&(b, d)| d > b));
        let bad = g.clone().with_label(Some(2));
        assert!(Sample::from_temporal(&bad, 2, 1.0).is_err());
    }

    #[test]
    fn random_init_loss_is_finite_and_positive() {
        let ms = ModelState::new(ModelConfig::default()).unwrap();
        let g = dowker_core::synth::star(3).with_label(Some(1));
        let s = Sample::from_temporal(&g, 2, 1.0).unwrap();
        let l = sample_loss(&ms, &s, 1.0);
        assert!(l.is_finite() && l > 0.0);
    }
}
