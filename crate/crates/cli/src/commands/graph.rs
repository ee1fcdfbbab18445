use std::path::PathBuf;

use dowker_core::{
    build_line_graphs, check_duality, pd0_with_edge_map, pd1, EdgePointMap, Kind, LineGraphStats,
    PersistenceDiagram,
};
use serde::Serialize;

use super::{par_map, records};
use crate::error::{CliError, Result};
use crate::input::{load_graphs, weighted};
use crate::settings::Settings;
use crate::WeightArgs;

#[derive(Serialize)]
struct LineGraphRecord {
    input: String,
    source: serde_json::Value,
    sink: serde_json::Value,
    source_stats: LineGraphStats,
    sink_stats: LineGraphStats,
}

pub fn linegraph(inputs: &[PathBuf], w: WeightArgs, s: &Settings) -> Result<String> {
    let graphs = load_graphs(inputs)?;
    let out = par_map(s, &graphs, |n| {
        let g = weighted(&n.graph, w.raw_weights)?;
        let (so, si) = build_line_graphs(&g);
        Ok(LineGraphRecord {
            input: n.name.clone(),
            source: so.to_json(),
            sink: si.to_json(),
            source_stats: so.stats(),
            sink_stats: si.stats(),
        })
    })?;
    records(out)
}

#[derive(Serialize)]
pub struct PdRecord {
    pub input: String,
    pub kind: Kind,
    pub pd0: PersistenceDiagram,
    pub pd1: PersistenceDiagram,
    pub edge_map: EdgePointMap,
}

pub fn pd(inputs: &[PathBuf], kind: Kind, w: WeightArgs, s: &Settings) -> Result<String> {
    let graphs = load_graphs(inputs)?;
    let out = par_map(s, &graphs, |n| {
        let g = weighted(&n.graph, w.raw_weights)?;
        let (pd0, edge_map) = pd0_with_edge_map(&g, kind);
        Ok(PdRecord {
            input: n.name.clone(),
            kind,
            pd0: pd0.sorted(),
            pd1: pd1(&g, kind).sorted(),
            edge_map,
        })
    })?;
    records(out)
}

#[derive(Serialize)]
struct DualityRecord {
    input: String,
    pd0_match: bool,
    pd1_match: bool,
}

pub fn duality(inputs: &[PathBuf], w: WeightArgs, s: &Settings) -> Result<String> {
    let graphs = load_graphs(inputs)?;
    let out = par_map(s, &graphs, |n| {
        let r = check_duality(&weighted(&n.graph, w.raw_weights)?);
        Ok(DualityRecord {
            input: n.name.clone(),
            pd0_match: r.pd0_match,
            pd1_match: r.pd1_match,
        })
    })?;
    let failed: Vec<&str> = out
        .iter()
        .filter(|r| !(r.pd0_match && r.pd1_match))
        .map(|r| r.input.as_str())
        .collect();
    if !failed.is_empty() {
        eprint!("{}", records(out.iter().collect())?);
        return Err(CliError::Invariant(format!(
            "source and sink diagrams differ for {}",
            failed.join(", ")
        )));
    }
    records(out)
}
