//! Whitespace edge-list files.
//!
//! One `source target time` triple per line; `#` starts a comment. A leading
//! `# nodes N` comment is honoured as a lower bound on the node count so that
//! exported graphs with isolated nodes re-ingest unchanged. Labels live in a
//! sidecar `labels.txt` next to the edge files, one `graph_id label` per line,
//! where `graph_id` is the edge file's stem.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::TemporalDigraph;
use crate::error::{Error, Result};

pub const LABELS_FILE: &str = "labels.txt";

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

fn parse_edges(path: &Path, text: &str) -> Result<TemporalDigraph> {
    let mut raw = Vec::new();
    let mut declared_nodes = 0usize;
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let trimmed = line.trim();
        if let Some(comment) = trimmed.strip_prefix('#') {
            let mut parts = comment.split_whitespace();
            if parts.next() == Some("nodes") {
                if let Some(n) = parts.next().and_then(|s| s.parse::<usize>().ok()) {
                    declared_nodes = declared_nodes.max(n);
                }
            }
            continue;
        }
        let body = trimmed.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let fields: Vec<&str> = body.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(parse_err(
                path,
                lineno,
                format!(
                    "expected `source target time`, found {} fields",
                    fields.len()
                ),
            ));
        }
        let source: u64 = fields[0]
            .parse()
            .map_err(|_| parse_err(path, lineno, format!("bad source id `{}`", fields[0])))?;
        let target: u64 = fields[1]
            .parse()
            .map_err(|_| parse_err(path, lineno, format!("bad target id `{}`", fields[1])))?;
        let time: f64 = fields[2]
            .parse()
            .map_err(|_| parse_err(path, lineno, format!("bad time `{}`", fields[2])))?;
        if !time.is_finite() {
            return Err(parse_err(path, lineno, "time must be finite"));
        }
        raw.push((source, target, time));
    }

    let ids: BTreeSet<u64> = raw.iter().flat_map(|&(s, t, _)| [s, t]).collect();
    let dense: BTreeMap<u64, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let node_count = ids.len().max(declared_nodes);
    TemporalDigraph::from_edges(
        node_count,
        raw.into_iter()
            .map(|(s, t, time)| (dense[&s], dense[&t], time)),
    )
}

fn file_err(path: &Path, source: std::io::Error) -> Error {
    Error::File {
        path: path.display().to_string(),
        source,
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| file_err(path, e))
}

fn read_labels(path: &Path) -> Result<BTreeMap<String, i64>> {
    let text = read_text(path)?;
    let mut labels = BTreeMap::new();
    for (idx, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut parts = body.split_whitespace();
        let (Some(id), Some(label), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(parse_err(path, idx + 1, "expected `graph_id label`"));
        };
        let label: i64 = label
            .parse()
            .map_err(|_| parse_err(path, idx + 1, format!("bad label `{label}`")))?;
        labels.insert(id.to_string(), label);
    }
    Ok(labels)
}

fn graph_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Reads one edge-list file. Node ids are re-indexed densely in ascending
/// order of their raw values. With `has_labels`, the graph's label is looked
/// up in the sibling `labels.txt`.
pub fn load_edge_list(path: impl AsRef<Path>, has_labels: bool) -> Result<TemporalDigraph> {
    let path = path.as_ref();
    let text = read_text(path)?;
    let mut g = parse_edges(path, &text)?;
    if has_labels {
        let sidecar = path
            .parent()
            .unwrap_or_else(|| Path::new("."))
            .join(LABELS_FILE);
        let labels = read_labels(&sidecar)?;
        let id = graph_id(path);
        g.label = Some(*labels.get(&id).ok_or(Error::MissingLabel(id))?);
    }
    Ok(g)
}

/// Serializes a graph in the format [`load_edge_list`] reads.
pub fn format_edge_list(g: &TemporalDigraph) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# nodes {}", g.node_count());
    for e in g.edges() {
        let _ = writeln!(out, "{} {} {}", e.source, e.target, e.time);
    }
    out
}

pub fn write_edge_list(g: &TemporalDigraph, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, format_edge_list(g))?;
    Ok(())
}

fn is_edge_file(path: &Path) -> bool {
    path.is_file()
        && path.file_name().map(|n| n != LABELS_FILE).unwrap_or(false)
        && matches!(
            path.extension().and_then(|e| e.to_str()),
            Some("tsv" | "txt" | "edges")
        )
}

/// Loads every edge file in `dir` in file-name order, attaching labels from
/// `labels.txt` when it exists.
pub fn load_dataset(dir: impl AsRef<Path>) -> Result<Vec<(String, TemporalDigraph)>> {
    let dir = dir.as_ref();
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| file_err(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| is_edge_file(p))
        .collect();
    files.sort();
    let labels_path = dir.join(LABELS_FILE);
    let labels = if labels_path.exists() {
        read_labels(&labels_path)?
    } else {
        BTreeMap::new()
    };
    files
        .into_iter()
        .map(|p| {
            let id = graph_id(&p);
            let text = read_text(&p)?;
            let g = parse_edges(&p, &text)?.with_label(labels.get(&id).copied());
            Ok((id, g))
        })
        .collect()
}

/// Writes graphs as `g0000.tsv`, `g0001.tsv`, ... plus `labels.txt` for the
/// labelled ones. Returns the generated ids.
pub fn write_dataset(dir: impl AsRef<Path>, graphs: &[TemporalDigraph]) -> Result<Vec<String>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let mut labels = String::new();
    let mut ids = Vec::with_capacity(graphs.len());
    for (i, g) in graphs.iter().enumerate() {
        let id = format!("g{i:04}");
        write_edge_list(g, dir.join(format!("{id}.tsv")))?;
        if let Some(label) = g.label {
            let _ = writeln!(labels, "{id} {label}");
        }
        ids.push(id);
    }
    if !labels.is_empty() {
        fs::write(dir.join(LABELS_FILE), labels)?;
    }
    Ok(ids)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<TemporalDigraph> {
        parse_edges(Path::new("mem.tsv"), text)
    }

    #[test]
    fn collapses_and_drops() {
        let g = parse("0 1 5\n0 1 3\n2 2 1").unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.edges()[0].time, 3.0);
    }

    #[test]
    fn single_line() {
        let g = parse("0 1 7").unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (2, 1));
    }

    #[test]
    fn sparse_ids_are_reindexed() {
        let g = parse("# a comment\n10 30 1.5 # trailing\n\n30 20 2\n").unwrap();
        assert_eq!(g.node_count(), 3);
        let e: Vec<_> = g.edges().iter().map(|e| (e.source, e.target)).collect();
        assert_eq!(e, vec![(0, 2), (2, 1)]);
    }

    #[test]
    fn parse_error_reports_line() {
        match parse("0 1 2\n0 x 3\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        match parse("0 1\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_file_is_an_error() {
        assert!(matches!(parse("# nothing\n"), Err(Error::EmptyGraph)));
    }

    #[test]
    fn export_preserves_isolated_nodes() {
        let g = parse("0 1 5\n2 2 1").unwrap();
        let again = parse(&format_edge_list(&g)).unwrap();
        assert_eq!(again, g);
    }
}
