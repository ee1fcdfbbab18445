//! 2-Wasserstein distance between persistence diagrams.
//!
//! Points may be matched to each other at squared Euclidean cost or sent to
//! their orthogonal projection onto the diagonal at cost `(d - b)² / 2`. The
//! optimal plan is found exactly with [`min_cost_assignment`].

use serde::{Deserialize, Serialize};

use super::hungarian::min_cost_assignment;
use crate::error::{Error, Result};
use crate::persistence::PersistenceDiagram;

/// One side of a matched pair: a point index, or the diagonal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Slot {
    Point(usize),
    Diagonal,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matching {
    pub pairs: Vec<(Slot, Slot)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WassersteinOptions {
    /// Replacement for infinite deaths.
    pub inf_cap: f64,
    /// Keep zero-persistence points instead of dropping them.
    pub keep_diagonal: bool,
}

impl Default for WassersteinOptions {
    fn default() -> Self {
        WassersteinOptions {
            inf_cap: 1.0,
            keep_diagonal: false,
        }
    }
}

#[inline]
fn diagonal_cost((b, d): (f64, f64)) -> f64 {
    let p = d - b;
    0.5 * p * p
}

#[inline]
fn point_cost((b1, d1): (f64, f64), (b2, d2): (f64, f64)) -> f64 {
    (b1 - b2) * (b1 - b2) + (d1 - d2) * (d1 - d2)
}

fn canonical_order(a: &[(f64, f64)], b: &[(f64, f64)]) -> std::cmp::Ordering {
    a.len().cmp(&b.len()).then_with(|| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    })
}

/// Optimal matching between two finite point sets. Returns the total
/// squared cost and the plan, with indices into `a` and `b`.
///
/// The problem is always solved with the arguments in a canonical order, so
/// swapping them yields a bit-identical cost.
pub fn optimal_matching(a: &[(f64, f64)], b: &[(f64, f64)]) -> (f64, Matching) {
    if canonical_order(a, b).is_gt() {
        let (total, m) = solve(b, a);
        let pairs = m.pairs.into_iter().map(|(l, r)| (r, l)).collect();
        return (total, Matching { pairs });
    }
    solve(a, b)
}

fn solve(a: &[(f64, f64)], b: &[(f64, f64)]) -> (f64, Matching) {
    let (n, m) = (a.len(), b.len());
    let size = n + m;
    let mut cost = vec![0.0; size * size];
    for i in 0..n {
        let row = &mut cost[i * size..(i + 1) * size];
        for j in 0..m {
            row[j] = point_cost(a[i], b[j]);
        }
        let dc = diagonal_cost(a[i]);
        row[m..].iter_mut().for_each(|c| *c = dc);
    }
    for i in n..size {
        let row = &mut cost[i * size..(i + 1) * size];
        for j in 0..m {
            row[j] = diagonal_cost(b[j]);
        }
    }
    let assign = min_cost_assignment(&cost, size);

    let mut total = 0.0;
    let mut pairs = Vec::with_capacity(size);
    for (row, &col) in assign.iter().enumerate() {
        let left = if row < n {
            Slot::Point(row)
        } else {
            Slot::Diagonal
        };
        let right = if col < m {
            Slot::Point(col)
        } else {
            Slot::Diagonal
        };
        let c = match (left, right) {
            (Slot::Point(i), Slot::Point(j)) => point_cost(a[i], b[j]),
            (Slot::Point(i), Slot::Diagonal) => diagonal_cost(a[i]),
            (Slot::Diagonal, Slot::Point(j)) => diagonal_cost(b[j]),
            (Slot::Diagonal, Slot::Diagonal) => continue,
        };
        total += c;
        pairs.push((left, right));
    }
    (total, Matching { pairs })
}

/// Total squared cost of an arbitrary valid plan; used to check optimality.
pub fn matching_cost(a: &[(f64, f64)], b: &[(f64, f64)], m: &Matching) -> f64 {
    m.pairs
        .iter()
        .map(|&(l, r)| match (l, r) {
            (Slot::Point(i), Slot::Point(j)) => point_cost(a[i], b[j]),
            (Slot::Point(i), Slot::Diagonal) => diagonal_cost(a[i]),
            (Slot::Diagonal, Slot::Point(j)) => diagonal_cost(b[j]),
            (Slot::Diagonal, Slot::Diagonal) => 0.0,
        })
        .sum()
}

/// Capped points of `d` together with their indices in `d.points`.
fn prepared(d: &PersistenceDiagram, opts: &WassersteinOptions) -> (Vec<(f64, f64)>, Vec<usize>) {
    let mut pts = Vec::with_capacity(d.len());
    let mut idx = Vec::with_capacity(d.len());
    for (i, p) in d.points.iter().enumerate() {
        let b = p.birth.get();
        let dd = p.death.capped(opts.inf_cap).max(b);
        if !opts.keep_diagonal && dd == b {
            continue;
        }
        pts.push((b, dd));
        idx.push(i);
    }
    (pts, idx)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WassersteinResult {
    pub distance: f64,
    /// Indices refer to the input diagrams' `points`.
    pub matching: Matching,
}

pub fn wasserstein2_with(
    a: &PersistenceDiagram,
    b: &PersistenceDiagram,
    opts: &WassersteinOptions,
) -> Result<WassersteinResult> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch(format!(
            "cannot compare a dim-{} diagram with a dim-{} diagram",
            a.dim, b.dim
        )));
    }
    let (pa, ia) = prepared(a, opts);
    let (pb, ib) = prepared(b, opts);
    let (total, m) = optimal_matching(&pa, &pb);
    let remap = |s: Slot, idx: &[usize]| match s {
        Slot::Point(i) => Slot::Point(idx[i]),
        Slot::Diagonal => Slot::Diagonal,
    };
    let matching = Matching {
        pairs: m
            .pairs
            .into_iter()
            .map(|(l, r)| (remap(l, &ia), remap(r, &ib)))
            .collect(),
    };
    Ok(WassersteinResult {
        distance: total.max(0.0).sqrt(),
        matching,
    })
}

pub fn wasserstein2(a: &PersistenceDiagram, b: &PersistenceDiagram) -> Result<WassersteinResult> {
    wasserstein2_with(a, b, &WassersteinOptions::default())
}
