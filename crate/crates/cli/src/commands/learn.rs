use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use dowker_core::metrics::{persistence_image, pie, wasserstein2_with, WassersteinOptions};
use dowker_core::{diagrams, FiltrationWeight, Kind, PdPoint, PersistenceDiagram};
use dowker_nn::{
    load_model, predict as run_model, save_model, train_split, EpochRecord, GraphInput, ModelState,
    Sample,
};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{par_map, records, to_json};
use crate::error::{CliError, Result};
use crate::input::{load_graphs, Named};
use crate::settings::Settings;

fn samples(s: &Settings, graphs: &[Named], classes: usize) -> Result<Vec<Sample>> {
    let cap = s.inf_cap();
    par_map(s, graphs, |n| {
        Sample::from_temporal(&n.graph, classes, cap)
            .map_err(|e| CliError::Data(format!("{}: {e}", n.name)))
    })
}

#[derive(Serialize)]
struct TrainReport {
    model: String,
    train_graphs: usize,
    test_graphs: usize,
    parameters: usize,
    first: Option<EpochRecord>,
    last: Option<EpochRecord>,
}

pub fn train(
    data: &Path,
    model_out: &Path,
    history: Option<&Path>,
    init: Option<&Path>,
    s: &Settings,
) -> Result<String> {
    let graphs = load_graphs(&[data.to_path_buf()])?;
    let ms = match init {
        Some(p) => load_model(p)?,
        None => ModelState::new(s.model())?,
    };
    let cfg = s.train();
    let set = samples(s, &graphs, ms.config.classes)?;
    let (tr, te) = dowker_nn::split_indices(set.len(), cfg.train_fraction, cfg.seed);
    let train_set: Vec<&Sample> = tr.iter().map(|&i| &set[i]).collect();
    let test_set: Vec<&Sample> = te.iter().map(|&i| &set[i]).collect();
    let (ms, hist) = train_split(ms, &train_set, &test_set, &cfg)?;
    save_model(&ms, model_out)?;
    if let Some(h) = history {
        std::fs::write(h, hist.to_csv()).map_err(CliError::file(h))?;
    }
    to_json(&TrainReport {
        model: model_out.display().to_string(),
        train_graphs: train_set.len(),
        test_graphs: test_set.len(),
        parameters: ms.param_count(),
        first: hist.records.first().copied(),
        last: hist.records.last().copied(),
    })
}

#[derive(Serialize)]
struct PredictRecord {
    input: String,
    pd0: Vec<(f64, f64)>,
    pd1: Vec<(f64, f64)>,
    scores: Vec<f64>,
    label: usize,
}

pub fn predict(model: &Path, inputs: &[PathBuf], s: &Settings) -> Result<String> {
    let ms = load_model(model)?;
    let graphs = load_graphs(inputs)?;
    let out = par_map(s, &graphs, |n| {
        let p = run_model(&ms, &GraphInput::new(&n.graph.normalize()));
        Ok(PredictRecord {
            input: n.name.clone(),
            pd0: p.pd0,
            pd1: p.pd1,
            scores: p.scores,
            label: p.label,
        })
    })?;
    records(out)
}

/// Predicted points as a diagram; head outputs already lie in `[0, 1]`.
fn as_diagram(dim: u8, pts: &[(f64, f64)]) -> Result<PersistenceDiagram> {
    let w = |x: f64| FiltrationWeight::new(x.clamp(0.0, 1.0)).map_err(CliError::from);
    let points = pts
        .iter()
        .map(|&(b, d)| Ok(PdPoint::finite(w(b)?, w(d.max(b))?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(PersistenceDiagram::new(dim, points))
}

#[derive(Clone, Copy, Default, Serialize)]
struct Scores {
    wd0: f64,
    wd1: f64,
    pie0: f64,
    pie1: f64,
}

#[derive(Serialize)]
struct EvalRecord {
    input: String,
    #[serde(flatten)]
    scores: Scores,
}

#[derive(Serialize)]
struct EvalReport {
    graphs: Vec<EvalRecord>,
    mean: Scores,
}

pub fn eval(model: &Path, inputs: &[PathBuf], s: &Settings) -> Result<String> {
    let ms = load_model(model)?;
    let graphs = load_graphs(inputs)?;
    let opts = WassersteinOptions {
        inf_cap: s.inf_cap(),
        keep_diagonal: false,
    };
    let img = s.image();
    let out = par_map(s, &graphs, |n| {
        let g = n.graph.normalize();
        let p = run_model(&ms, &GraphInput::new(&g));
        let (e0, e1) = diagrams(&g, Kind::Sink);
        let (p0, p1) = (as_diagram(0, &p.pd0)?, as_diagram(1, &p.pd1)?);
        let (e0, e1) = (e0.positive(), e1.positive());
        Ok(EvalRecord {
            input: n.name.clone(),
            scores: Scores {
                wd0: wasserstein2_with(&p0, &e0, &opts)?.distance,
                wd1: wasserstein2_with(&p1, &e1, &opts)?.distance,
                pie0: pie(
                    &persistence_image(&p0, &img)?,
                    &persistence_image(&e0, &img)?,
                )?,
                pie1: pie(
                    &persistence_image(&p1, &img)?,
                    &persistence_image(&e1, &img)?,
                )?,
            },
        })
    })?;
    let k = out.len() as f64;
    let mut mean = Scores::default();
    for r in &out {
        mean.wd0 += r.scores.wd0 / k;
        mean.wd1 += r.scores.wd1 / k;
        mean.pie0 += r.scores.pie0 / k;
        mean.pie1 += r.scores.pie1 / k;
    }
    to_json(&EvalReport { graphs: out, mean })
}

/// Stratified fold assignment: each class is shuffled with `seed` and dealt
/// round-robin, continuing the deal across classes.
pub fn stratified_folds(labels: &[usize], folds: usize, seed: u64) -> Vec<usize> {
    let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        by_class.entry(l).or_default().push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold_of = vec![0; labels.len()];
    let mut next = 0;
    for members in by_class.values_mut() {
        members.shuffle(&mut rng);
        for &i in members.iter() {
            fold_of[i] = next % folds;
            next += 1;
        }
    }
    fold_of
}

#[derive(Serialize)]
struct FoldRecord {
    fold: usize,
    train_graphs: usize,
    test_graphs: usize,
    accuracy: f64,
}

#[derive(Serialize)]
struct ClassifyReport {
    folds: Vec<FoldRecord>,
    mean_accuracy: f64,
}

pub fn classify(data: &Path, s: &Settings) -> Result<String> {
    let graphs = load_graphs(&[data.to_path_buf()])?;
    if let Some(n) = graphs.iter().find(|n| n.graph.label.is_none()) {
        return Err(CliError::Data(format!("{} has no label", n.name)));
    }
    let k = s.folds();
    if k < 2 || k > graphs.len() {
        return Err(CliError::Usage(format!(
            "folds must lie in 2..={}",
            graphs.len()
        )));
    }
    let model = s.model();
    let set = samples(s, &graphs, model.classes)?;
    let labels: Vec<usize> = set
        .iter()
        .map(|x| x.label.expect("checked above"))
        .collect();
    let cfg = s.train();
    let fold_of = stratified_folds(&labels, k, cfg.seed);
    let folds: Vec<usize> = (0..k).collect();
    let out = par_map(s, &folds, |&f| {
        let train_set: Vec<&Sample> = set
            .iter()
            .zip(&fold_of)
            .filter(|(_, &g)| g != f)
            .map(|x| x.0)
            .collect();
        let test_set: Vec<&Sample> = set
            .iter()
            .zip(&fold_of)
            .filter(|(_, &g)| g == f)
            .map(|x| x.0)
            .collect();
        let (ms, _) = train_split(ModelState::new(model)?, &train_set, &[], &cfg)?;
        let acc = dowker_nn::evaluate(&ms, &test_set)
            .and_then(|e| e.accuracy)
            .ok_or_else(|| CliError::Data(format!("fold {f} is empty")))?;
        Ok(FoldRecord {
            fold: f,
            train_graphs: train_set.len(),
            test_graphs: test_set.len(),
            accuracy: acc,
        })
    })?;
    let mean_accuracy = out.iter().map(|r| r.accuracy).sum::<f64>() / k as f64;
    to_json(&ClassifyReport {
        folds: out,
        mean_accuracy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folds_are_balanced_per_class() {
        let labels: Vec<usize> = (0..20).map(|i| i % 2).collect();
        let f = stratified_folds(&labels, 5, 3);
        for fold in 0..5 {
            let members: Vec<usize> = (0..20).filter(|&i| f[i] == fold).collect();
            assert_eq!(members.len(), 4);
            assert_eq!(members.iter().filter(|&&i| labels[i] == 0).count(), 2);
        }
    }
}
