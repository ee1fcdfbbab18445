use std::path::Path;

use dowker_core::metrics::{persistence_image, wasserstein2_with, WassersteinOptions};
use dowker_core::{Kind, PersistenceDiagram};
use serde::Serialize;

use super::{records, to_json};
use crate::error::{CliError, Result};
use crate::input::load_diagrams;
use crate::settings::Settings;
use crate::WeightArgs;

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
pub enum ImageFormat {
    Csv,
    Json,
}

#[derive(Serialize)]
struct DistanceRecord {
    a: String,
    b: String,
    dim: u8,
    wd: f64,
}

fn pick(
    ds: Vec<PersistenceDiagram>,
    dim: Option<u8>,
    path: &Path,
) -> Result<Vec<PersistenceDiagram>> {
    let picked: Vec<_> = ds
        .into_iter()
        .filter(|d| dim.is_none_or(|k| d.dim == k))
        .collect();
    if picked.is_empty() {
        return Err(CliError::Data(format!(
            "{} has no diagram of dimension {}",
            path.display(),
            dim.unwrap_or(0)
        )));
    }
    Ok(picked)
}

pub fn wdist(
    a: &Path,
    b: &Path,
    dim: Option<u8>,
    kind: Kind,
    keep_diagonal: bool,
    w: WeightArgs,
    s: &Settings,
) -> Result<String> {
    let da = pick(load_diagrams(a, kind, w.raw_weights)?, dim, a)?;
    let db = pick(load_diagrams(b, kind, w.raw_weights)?, dim, b)?;
    let opts = WassersteinOptions {
        inf_cap: s.inf_cap(),
        keep_diagonal,
    };
    let mut out = Vec::new();
    for x in &da {
        let Some(y) = db.iter().find(|y| y.dim == x.dim) else {
            continue;
        };
        out.push(DistanceRecord {
            a: a.display().to_string(),
            b: b.display().to_string(),
            dim: x.dim,
            wd: wasserstein2_with(x, y, &opts)?.distance,
        });
    }
    if out.is_empty() {
        return Err(CliError::Data(
            "the inputs share no diagram dimension".into(),
        ));
    }
    records(out)
}

pub fn pimage(
    input: &Path,
    dim: u8,
    kind: Kind,
    format: ImageFormat,
    w: WeightArgs,
    s: &Settings,
) -> Result<String> {
    let d = pick(load_diagrams(input, kind, w.raw_weights)?, Some(dim), input)?.remove(0);
    let img = persistence_image(&d, &s.image())?;
    match format {
        ImageFormat::Csv => Ok(img.to_csv()),
        ImageFormat::Json => to_json(&img),
    }
}
