//! Reading graphs and diagrams from the paths given on the command line.

use std::path::{Path, PathBuf};

use dowker_core::graph::{load_dataset, load_edge_list, LABELS_FILE};
use dowker_core::{diagrams, Kind, PersistenceDiagram, TemporalDigraph, WeightedDigraph};
use serde::Deserialize;

use crate::error::{CliError, Result};

/// A graph with the name it is reported under.
pub struct Named {
    pub name: String,
    pub graph: TemporalDigraph,
}

/// Expands each path: a directory yields every edge file inside it (in
/// file-name order, labelled from its `labels.txt`), a file yields itself.
pub fn load_graphs(paths: &[PathBuf]) -> Result<Vec<Named>> {
    if paths.is_empty() {
        return Err(CliError::Usage("no input graphs given".into()));
    }
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let set = load_dataset(p)?;
            if set.is_empty() {
                return Err(CliError::Data(format!(
                    "{} holds no edge files",
                    p.display()
                )));
            }
            out.extend(set.into_iter().map(|(id, graph)| Named {
                name: p.join(&id).display().to_string(),
                graph,
            }));
        } else {
            let labelled = p
                .parent()
                .unwrap_or(Path::new("."))
                .join(LABELS_FILE)
                .exists();
            let graph = match load_edge_list(p, labelled) {
                Err(dowker_core::Error::MissingLabel(_)) => load_edge_list(p, false)?,
                r => r?,
            };
            out.push(Named {
                name: p.display().to_string(),
                graph,
            });
        }
    }
    Ok(out)
}

/// Filtration weights: min-max normalized times, or the raw times when
/// `raw` is set (they must already lie in `[0, 1]`).
pub fn weighted(g: &TemporalDigraph, raw: bool) -> Result<WeightedDigraph> {
    if raw {
        Ok(WeightedDigraph::from_edges(
            g.node_count(),
            g.edges().iter().map(|e| (e.source, e.target, e.time)),
        )?)
    } else {
        Ok(g.normalize())
    }
}

#[derive(Deserialize)]
struct PdRecord {
    pd0: PersistenceDiagram,
    pd1: PersistenceDiagram,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum DiagramFile {
    One(PersistenceDiagram),
    Pair(PdRecord),
}

/// Diagrams from a `.json` file (a single diagram or a `pd` record) or,
/// for any other file, computed exactly from an edge list.
pub fn load_diagrams(path: &Path, kind: Kind, raw: bool) -> Result<Vec<PersistenceDiagram>> {
    if path.extension().and_then(|e| e.to_str()) == Some("json") {
        let text = std::fs::read_to_string(path).map_err(CliError::file(path))?;
        let parsed: DiagramFile = serde_json::from_str(&text).map_err(|e| {
            CliError::Data(format!(
                "{}: not a diagram or pd record: {e}",
                path.display()
            ))
        })?;
        return Ok(match parsed {
            DiagramFile::One(d) => vec![d],
            DiagramFile::Pair(r) => vec![r.pd0, r.pd1],
        });
    }
    let g = load_edge_list(path, false)?;
    let (pd0, pd1) = diagrams(&weighted(&g, raw)?, kind);
    Ok(vec![pd0, pd1])
}
