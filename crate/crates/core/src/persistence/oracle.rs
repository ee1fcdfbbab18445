//! Brute-force reference for the Dowker diagrams.
//!
//! Enumerates every vertex subset of size at most three, evaluates its
//! filtration value by scanning every possible witness, and runs the plain
//! column reduction over the full boundary matrix. Nothing here is shared
//! with the fast path beyond the input and output types.

use super::diagram::{PdPoint, PersistenceDiagram};
use crate::error::{Error, Result};
use crate::graph::{FiltrationWeight, Kind, WeightedDigraph};

pub const ORACLE_NODE_CAP: usize = 12;

struct Cell {
    verts: Vec<usize>,
    value: FiltrationWeight,
}

fn min_max_value(
    weight: &[Vec<Option<FiltrationWeight>>],
    members: &[usize],
) -> Option<FiltrationWeight> {
    let mut best: Option<FiltrationWeight> = None;
    for w in 0..weight.len() {
        let mut worst: Option<FiltrationWeight> = None;
        let mut ok = true;
        for row in members.iter().map(|&b| &weight[b]) {
            match row[w] {
                Some(x) => worst = Some(worst.map_or(x, |y| y.max(x))),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            let x = worst.unwrap();
            best = Some(best.map_or(x, |y| y.min(x)));
        }
    }
    best
}

/// `(PD0, PD1)` by exhaustive enumeration. Rejects graphs above
/// [`ORACLE_NODE_CAP`] nodes.
pub fn naive_oracle_pd(
    g: &WeightedDigraph,
    kind: Kind,
) -> Result<(PersistenceDiagram, PersistenceDiagram)> {
    let n = g.node_count();
    if n > ORACLE_NODE_CAP {
        return Err(Error::OracleCapExceeded {
            cap: ORACLE_NODE_CAP,
            nodes: n,
        });
    }

    // weight[member][witness]
    let mut weight = vec![vec![None; n]; n];
    for e in g.edges() {
        match kind {
            Kind::Sink => weight[e.source][e.target] = Some(e.weight),
            Kind::Source => weight[e.target][e.source] = Some(e.weight),
        }
    }

    let mut cells = Vec::new();
    for a in 0..n {
        let members = vec![a];
        if let Some(v) = min_max_value(&weight, &members) {
            cells.push(Cell {
                verts: members,
                value: v,
            });
        }
        for b in a + 1..n {
            let members = vec![a, b];
            if let Some(v) = min_max_value(&weight, &members) {
                cells.push(Cell {
                    verts: members,
                    value: v,
                });
            }
            for c in b + 1..n {
                let members = vec![a, b, c];
                if let Some(v) = min_max_value(&weight, &members) {
                    cells.push(Cell {
                        verts: members,
                        value: v,
                    });
                }
            }
        }
    }
    cells.sort_by(|x, y| {
        x.value
            .cmp(&y.value)
            .then(x.verts.len().cmp(&y.verts.len()))
            .then(x.verts.cmp(&y.verts))
    });

    let index_of = |verts: &[usize]| -> usize {
        cells
            .iter()
            .position(|c| c.verts == verts)
            .expect("faces of a witnessed simplex are witnessed")
    };
    let mut columns: Vec<Vec<usize>> = cells
        .iter()
        .map(|c| {
            let mut col: Vec<usize> = (0..c.verts.len())
                .filter(|_| c.verts.len() > 1)
                .map(|skip| {
                    let face: Vec<usize> = c
                        .verts
                        .iter()
                        .enumerate()
                        .filter(|&(i, _)| i != skip)
                        .map(|(_, &v)| v)
                        .collect();
                    index_of(&face)
                })
                .collect();
            col.sort_unstable();
            col
        })
        .collect();

    // textbook left-to-right reduction
    let low = |col: &Vec<usize>| col.last().copied();
    for j in 0..columns.len() {
        while let Some(lj) = low(&columns[j]) {
            let Some(k) = (0..j).find(|&k| low(&columns[k]) == Some(lj)) else {
                break;
            };
            let other = columns[k].clone();
            let mut merged = Vec::new();
            for r in columns[j].iter().chain(other.iter()) {
                if let Some(pos) = merged.iter().position(|x| x == r) {
                    merged.remove(pos);
                } else {
                    merged.push(*r);
                }
            }
            merged.sort_unstable();
            columns[j] = merged;
        }
    }

    let mut killed_by: Vec<Option<usize>> = vec![None; cells.len()];
    for (j, col) in columns.iter().enumerate() {
        if let Some(i) = low(col) {
            killed_by[i] = Some(j);
        }
    }
    let mut pd0 = Vec::new();
    let mut pd1 = Vec::new();
    for (i, cell) in cells.iter().enumerate() {
        let creates = columns[i].is_empty();
        if !creates {
            continue;
        }
        let point = match killed_by[i] {
            Some(j) => PdPoint::finite(cell.value, cells[j].value),
            None => PdPoint::essential(cell.value),
        };
        match cell.verts.len() {
            1 => pd0.push(point),
            2 => pd1.push(point),
            _ => {}
        }
    }
    Ok((
        PersistenceDiagram::new(0, pd0).sorted(),
        PersistenceDiagram::new(1, pd1).sorted(),
    ))
}
