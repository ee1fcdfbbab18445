//! Seeded minibatch training with Adam.

use std::fmt::Write as _;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{NnError, Result};
use crate::loss::{batch_gradient, point_wd, Sample};
use crate::model::{predict, ModelState};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Weight of the cross-entropy term.
    pub lambda: f64,
    pub seed: u64,
    pub inf_cap: f64,
    pub train_fraction: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 50,
            batch_size: 8,
            learning_rate: 1e-3,
            lambda: 1.0,
            seed: 0,
            inf_cap: 1.0,
            train_fraction: 0.8,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(NnError::Config(m.into()));
        if self.epochs == 0 || self.batch_size == 0 {
            return bad("epochs and batch size must be positive");
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad("learning rate must be finite and non-negative");
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad("lambda must be finite and non-negative");
        }
        if !(self.inf_cap > 0.0 && self.inf_cap.is_finite()) {
            return bad("infinite-death cap must be positive");
        }
        if !(self.train_fraction > 0.0 && self.train_fraction <= 1.0) {
            return bad("train fraction must lie in (0, 1]");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub test_wd0: Option<f64>,
    pub test_wd1: Option<f64>,
    pub accuracy: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct History {
    pub records: Vec<EpochRecord>,
}

impl History {
    pub fn losses(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.train_loss).collect()
    }

    /// `epoch,train_loss,test_wd0,test_wd1,accuracy`; missing values are
    /// left empty.
    pub fn to_csv(&self) -> String {
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        let mut out = String::from("epoch,train_loss,test_wd0,test_wd1,accuracy\n");
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.epoch,
                r.train_loss,
                opt(r.test_wd0),
                opt(r.test_wd1),
                opt(r.accuracy)
            );
        }
        out
    }
}

/// Mean metrics of a model over a sample set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub wd0: f64,
    pub wd1: f64,
    /// `None` when no sample carries a label.
    pub accuracy: Option<f64>,
}

pub fn evaluate(ms: &ModelState, samples: &[&Sample]) -> Option<Evaluation> {
    if samples.is_empty() {
        return None;
    }
    let (mut wd0, mut wd1, mut hit, mut labelled) = (0.0, 0.0, 0usize, 0usize);
    for s in samples {
        let p = predict(ms, &s.input);
        wd0 += point_wd(&p.pd0, &s.gt0);
        wd1 += point_wd(&p.pd1, &s.gt1);
        if let Some(l) = s.label {
            labelled += 1;
            hit += usize::from(p.label == l);
        }
    }
    let n = samples.len() as f64;
    Some(Evaluation {
        wd0: wd0 / n,
        wd1: wd1 / n,
        accuracy: (labelled > 0).then(|| hit as f64 / labelled as f64),
    })
}

/// Mean degree-0 distance of the predictor that puts every edge at
/// `(0.5, 0.5)`; all such points match the diagonal at zero cost.
pub fn constant_baseline_wd0(samples: &[&Sample]) -> f64 {
    let total: f64 = samples
        .iter()
        .map(|s| point_wd(&vec![(0.5, 0.5); s.edge_count()], &s.gt0))
        .sum();
    total / samples.len().max(1) as f64
}

/// Seeded shuffle split; the training part gets `round(fraction · n)`
/// samples, at least one, and leaves at least one for testing when `n ≥ 2`
/// and `fraction < 1`.
pub fn split_indices(n: usize, fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut k = ((n as f64) * fraction).round() as usize;
    k = k.clamp(1.min(n), n);
    if fraction < 1.0 && n >= 2 && k == n {
        k = n - 1;
    }
    let test = idx.split_off(k);
    (idx, test)
}

pub fn adam_step(ms: &mut ModelState, grads: &[Array2<f64>], cfg: &TrainConfig) {
    let a = &mut ms.adam;
    a.step += 1;
    let t = a.step as i32;
    let c1 = 1.0 - cfg.beta1.powi(t);
    let c2 = 1.0 - cfg.beta2.powi(t);
    for (((p, g), m), v) in ms.params.iter_mut().zip(grads).zip(&mut a.m).zip(&mut a.v) {
        m.zip_mut_with(g, |m, &g| *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g);
        v.zip_mut_with(g, |v, &g| *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g);
        let lr = cfg.learning_rate;
        ndarray::Zip::from(&mut p.value)
            .and(&*m)
            .and(&*v)
            .for_each(|w, &m, &v| {
                *w -= lr * (m / c1) / ((v / c2).sqrt() + cfg.epsilon);
            });
    }
}

/// Splits `dataset` by `cfg.train_fraction` and trains on the first part.
pub fn train(
    ms: ModelState,
    dataset: &[Sample],
    cfg: &TrainConfig,
) -> Result<(ModelState, History)> {
    if dataset.is_empty() {
        return Err(NnError::EmptyDataset);
    }
    let (tr, te) = split_indices(dataset.len(), cfg.train_fraction, cfg.seed);
    let train_set: Vec<&Sample> = tr.iter().map(|&i| &dataset[i]).collect();
    let test_set: Vec<&Sample> = te.iter().map(|&i| &dataset[i]).collect();
    train_split(ms, &train_set, &test_set, cfg)
}

/// Trains on `train_set`, logging test metrics after every epoch.
pub fn train_split(
    mut ms: ModelState,
    train_set: &[&Sample],
    test_set: &[&Sample],
    cfg: &TrainConfig,
) -> Result<(ModelState, History)> {
    cfg.validate()?;
    if train_set.is_empty() {
        return Err(NnError::EmptyDataset);
    }
    for s in train_set.iter().chain(test_set) {
        if let Some(l) = s.label {
            if l >= ms.config.classes {
                return Err(NnError::Label {
                    label: l as i64,
                    classes: ms.config.classes,
                });
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut history = History::default();
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<&Sample> = chunk.iter().map(|&i| train_set[i]).collect();
            let (loss, grads) = batch_gradient(&ms, &batch, cfg.lambda);
            total += loss * batch.len() as f64;
            adam_step(&mut ms, &grads, cfg);
        }
        let eval = evaluate(&ms, test_set);
        history.records.push(EpochRecord {
            epoch,
            train_loss: total / train_set.len() as f64,
            test_wd0: eval.map(|e| e.wd0),
            test_wd1: eval.map(|e| e.wd1),
            accuracy: eval.and_then(|e| e.accuracy),
        });
    }
    Ok((ms, history))
}
