use std::path::PathBuf;

use dowker_core::graph::write_dataset;
use dowker_core::synth::{classification_benchmark, generate, Family, GeneratorSpec};
use serde::Serialize;

use super::to_json;
use crate::error::{CliError, Result};
use crate::settings::Settings;

#[derive(clap::ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilyName {
    RandomTemporal,
    DiffusionTree,
    Fig1bTriple,
    Star,
    Cycle,
    /// Diffusion trees (label 0) interleaved with random digraphs (label 1)
    TwoClass,
}

#[derive(clap::Args, Debug)]
pub struct GenArgs {
    /// Directory to write `g0000.tsv`, ... and `labels.txt` into
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, value_enum, required_unless_present = "spec")]
    pub family: Option<FamilyName>,
    /// Generator spec as JSON, e.g. {"family":"star","k":3}
    #[arg(long, conflicts_with = "family")]
    pub spec: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    /// Node count or inclusive range `lo:hi`
    #[arg(long, default_value = "10:20", value_parser = parse_range)]
    pub nodes: (usize, usize),
    /// Edge count or inclusive range `lo:hi` (random family only)
    #[arg(long, default_value = "20:40", value_parser = parse_range)]
    pub edges: (usize, usize),
    /// Size of star and cycle fixtures
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    /// Label attached to every generated graph
    #[arg(long)]
    pub label: Option<i64>,
}

pub fn parse_range(s: &str) -> std::result::Result<(usize, usize), String> {
    let num = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| format!("bad count `{t}`"))
    };
    match s.split_once(':') {
        Some((lo, hi)) => {
            let (lo, hi) = (num(lo)?, num(hi)?);
            if lo > hi {
                return Err(format!("empty range `{s}`"));
            }
            Ok((lo, hi))
        }
        None => num(s).map(|n| (n, n)),
    }
}

#[derive(Serialize)]
struct GenReport {
    dir: String,
    graphs: Vec<String>,
    labels: Vec<Option<i64>>,
    edges: Vec<usize>,
}

pub fn gen(args: &GenArgs, s: &Settings) -> Result<String> {
    let seed = s.seed();
    let graphs = if let Some(path) = &args.spec {
        let text = std::fs::read_to_string(path).map_err(CliError::file(path))?;
        let spec: GeneratorSpec = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        generate(&spec)?
    } else {
        let family = match args.family.expect("clap enforces family or spec") {
            FamilyName::TwoClass => {
                if args.count == 0 || args.nodes.0 < 2 {
                    return Err(CliError::Usage(
                        "two-class needs count >= 1 and nodes >= 2".into(),
                    ));
                }
                let gs = classification_benchmark(args.count, args.nodes, seed);
                return report(args, gs);
            }
            FamilyName::RandomTemporal => Family::RandomTemporal {
                nodes: args.nodes,
                edges: args.edges,
            },
            FamilyName::DiffusionTree => Family::DiffusionTree { nodes: args.nodes },
            FamilyName::Fig1bTriple => Family::Fig1bTriple,
            FamilyName::Star => Family::Star { k: args.k },
            FamilyName::Cycle => Family::Cycle { k: args.k },
        };
        let mut spec = GeneratorSpec::new(family, args.count, seed);
        spec.label = args.label;
        generate(&spec)?
    };
    report(args, graphs)
}

fn report(args: &GenArgs, graphs: Vec<dowker_core::TemporalDigraph>) -> Result<String> {
    let graphs: Vec<_> = match args.label {
        Some(l) => graphs.into_iter().map(|g| g.with_label(Some(l))).collect(),
        None => graphs,
    };
    let ids = write_dataset(&args.out_dir, &graphs)?;
    to_json(&GenReport {
        dir: args.out_dir.display().to_string(),
        graphs: ids,
        labels: graphs.iter().map(|g| g.label).collect(),
        edges: graphs.iter().map(|g| g.edge_count()).collect(),
    })
}
