//! Network parameters and the forward pass.
//!
//! Each layer updates a source branch and a sink branch from the shared
//! edge state, then fuses the two back into one state:
//!
//! ```text
//! h_so = relu(h · S_so + (A_so h) · M_so + b_so)
//! h_si = relu(h · S_si + (A_si h) · M_si + b_si)
//! h    = relu([h_so | h_si] · F + b_f)
//! ```
//!
//! `A_so` and `A_si` sum over line-graph neighbours. Three two-layer heads
//! read the final state: birth/death per edge, birth/death per edge from
//! a weight-scaled neighbourhood sum, and class scores from a pooled row.

use std::sync::Arc;

use dowker_core::{LineGraph, WeightedDigraph};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{NnError, Result};
use crate::tape::{SparseRows, Tape, Var};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pooling {
    #[default]
    Max,
    Mean,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub hidden: usize,
    pub layers: usize,
    pub classes: usize,
    /// Use one set of branch weights for both source and sink updates.
    #[serde(default)]
    pub shared_branches: bool,
    #[serde(default)]
    pub pooling: Pooling,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            hidden: 32,
            layers: 3,
            classes: 2,
            shared_branches: false,
            pooling: Pooling::Max,
            seed: 0,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden == 0 || self.layers == 0 || self.classes == 0 {
            return Err(NnError::Config(
                "hidden dim, layer count and class count must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Parameter names and shapes, in storage order.
    pub fn layout(&self) -> Vec<(String, (usize, usize))> {
        let d = self.hidden;
        let mut out = Vec::new();
        for m in 0..self.layers {
            let d_in = if m == 0 { 1 } else { d };
            let branches: &[&str] = if self.shared_branches {
                &["br"]
            } else {
                &["so", "si"]
            };
            for br in branches {
                out.push((format!("layer{m}.{br}.self"), (d_in, d)));
                out.push((format!("layer{m}.{br}.msg"), (d_in, d)));
                out.push((format!("layer{m}.{br}.bias"), (1, d)));
            }
            out.push((format!("layer{m}.fuse"), (2 * d, d)));
            out.push((format!("layer{m}.fuse.bias"), (1, d)));
        }
        for (head, width) in [("pd0", 2), ("pd1", 2), ("label", self.classes)] {
            out.push((format!("{head}.w1"), (d, d)));
            out.push((format!("{head}.b1"), (1, d)));
            out.push((format!("{head}.w2"), (d, width)));
            out.push((format!("{head}.b2"), (1, width)));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Param {
    pub name: String,
    pub value: Array2<f64>,
}

/// Adam moment buffers, one pair per parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub step: u64,
    pub m: Vec<Array2<f64>>,
    pub v: Vec<Array2<f64>>,
}

impl AdamState {
    pub fn zeros(params: &[Param]) -> Self {
        AdamState {
            step: 0,
            m: params
                .iter()
                .map(|p| Array2::zeros(p.value.raw_dim()))
                .collect(),
            v: params
                .iter()
                .map(|p| Array2::zeros(p.value.raw_dim()))
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelState {
    pub config: ModelConfig,
    pub params: Vec<Param>,
    pub adam: AdamState,
}

impl ModelState {
    /// Glorot-uniform weights and zero biases, drawn from `config.seed`.
    pub fn new(config: ModelConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let params: Vec<Param> = config
            .layout()
            .into_iter()
            .map(|(name, (r, c))| {
                let value = if is_bias(&name) {
                    Array2::zeros((r, c))
                } else {
                    let limit = (6.0 / (r + c) as f64).sqrt();
                    Array2::from_shape_simple_fn((r, c), || rng.gen_range(-limit..limit))
                };
                Param { name, value }
            })
            .collect();
        let adam = AdamState::zeros(&params);
        Ok(ModelState {
            config,
            params,
            adam,
        })
    }

    /// Every parameter set to zero.
    pub fn zeros(config: ModelConfig) -> Result<Self> {
        let mut ms = ModelState::new(config)?;
        ms.params.iter_mut().for_each(|p| p.value.fill(0.0));
        Ok(ms)
    }

    pub fn from_params(
        config: ModelConfig,
        params: Vec<Param>,
        adam: Option<AdamState>,
    ) -> Result<Self> {
        config.validate()?;
        let layout = config.layout();
        if layout.len() != params.len() {
            return Err(NnError::Shape(format!(
                "expected {} tensors, found {}",
                layout.len(),
                params.len()
            )));
        }
        for ((name, shape), p) in layout.iter().zip(&params) {
            if *name != p.name || *shape != p.value.dim() {
                return Err(NnError::Shape(format!(
                    "tensor `{}` {:?} does not match expected `{}` {:?}",
                    p.name,
                    p.value.dim(),
                    name,
                    shape
                )));
            }
            if p.value.iter().any(|x| !x.is_finite()) {
                return Err(NnError::Shape(format!(
                    "tensor `{}` has non-finite entries",
                    p.name
                )));
            }
        }
        let adam = match adam {
            Some(a) => {
                let ok = a.m.len() == params.len()
                    && a.v.len() == params.len()
                    && params
                        .iter()
                        .zip(a.m.iter().zip(&a.v))
                        .all(|(p, (m, v))| m.dim() == p.value.dim() && v.dim() == p.value.dim());
                if !ok {
                    return Err(NnError::Shape(
                        "optimizer moments do not match parameters".into(),
                    ));
                }
                a
            }
            None => AdamState::zeros(&params),
        };
        Ok(ModelState {
            config,
            params,
            adam,
        })
    }

    pub fn param(&self, name: &str) -> Option<&Array2<f64>> {
        self.params
            .iter()
            .find(|p| p.name == name)
            .map(|p| &p.value)
    }

    pub fn param_count(&self) -> usize {
        self.params.iter().map(|p| p.value.len()).sum()
    }

    /// Exchanges source and sink branch weights and the matching halves of
    /// each fusion matrix. Running the result on the reversed graph gives
    /// the same fused embeddings as running `self` on the original.
    pub fn swapped_branches(&self) -> Self {
        let mut out = self.clone();
        let d = self.config.hidden;
        let idx = |name: &str| self.params.iter().position(|p| p.name == name).unwrap();
        for m in 0..self.config.layers {
            if !self.config.shared_branches {
                for part in ["self", "msg", "bias"] {
                    let a = idx(&format!("layer{m}.so.{part}"));
                    let b = idx(&format!("layer{m}.si.{part}"));
                    out.params[a].value = self.params[b].value.clone();
                    out.params[b].value = self.params[a].value.clone();
                }
            }
            let f = idx(&format!("layer{m}.fuse"));
            let src = &self.params[f].value;
            let dst = &mut out.params[f].value;
            for r in 0..d {
                dst.row_mut(r).assign(&src.row(r + d));
                dst.row_mut(r + d).assign(&src.row(r));
            }
        }
        out.adam = AdamState::zeros(&out.params);
        out
    }
}

fn is_bias(name: &str) -> bool {
    name.ends_with("bias") || name.ends_with(".b1") || name.ends_with(".b2")
}

/// Per-edge initial features: one column holding each edge's weight.
pub fn init_features(g: &WeightedDigraph) -> Array2<f64> {
    Array2::from_shape_vec((g.edge_count(), 1), g.weights().collect()).expect("E × 1")
}

/// Everything the network reads from one graph.
#[derive(Clone, Debug)]
pub struct GraphInput {
    pub h0: Array2<f64>,
    pub source: Arc<SparseRows>,
    pub sink: Arc<SparseRows>,
    /// Weight-scaled sum over the union of both neighbourhoods.
    pub weighted: Arc<SparseRows>,
}

impl GraphInput {
    pub fn new(g: &WeightedDigraph) -> Self {
        let (so, si) = dowker_core::build_line_graphs(g);
        GraphInput::from_line_graphs(&so, &si, init_features(g))
            .expect("consistent by construction")
    }

    pub fn from_line_graphs(so: &LineGraph, si: &LineGraph, h0: Array2<f64>) -> Result<Self> {
        let e = h0.nrows();
        if so.node_count() != e || si.node_count() != e {
            return Err(NnError::Shape(format!(
                "line graphs have {} and {} nodes but features have {} rows",
                so.node_count(),
                si.node_count(),
                e
            )));
        }
        if h0.ncols() != 1 {
            return Err(NnError::Shape(format!(
                "initial features need 1 column, got {}",
                h0.ncols()
            )));
        }
        let unit = |lg: &LineGraph| SparseRows {
            rows: (0..e)
                .map(|u| lg.neighbors(u).iter().map(|&v| (v, 1.0)).collect())
                .collect(),
        };
        let weighted = SparseRows {
            rows: (0..e)
                .map(|u| {
                    let mut row: Vec<(usize, f64)> = so
                        .neighbors(u)
                        .iter()
                        .chain(si.neighbors(u))
                        .map(|&v| (v, h0[[v, 0]]))
                        .collect();
                    row.sort_by_key(|&(v, _)| v);
                    row.dedup_by_key(|&mut (v, _)| v);
                    row
                })
                .collect(),
        };
        Ok(GraphInput {
            source: Arc::new(unit(so)),
            sink: Arc::new(unit(si)),
            weighted: Arc::new(weighted),
            h0,
        })
    }

    pub fn edge_count(&self) -> usize {
        self.h0.nrows()
    }
}

/// Parameters placed on a tape as leaves, indexed like `ModelState::params`.
pub struct Bound {
    pub vars: Vec<Var>,
}

impl Bound {
    pub fn new(ms: &ModelState, tape: &mut Tape) -> Self {
        Bound {
            vars: ms
                .params
                .iter()
                .map(|p| tape.leaf(p.value.clone()))
                .collect(),
        }
    }
}

/// Outputs of one full pass.
pub struct Outputs {
    pub embeddings: Var,
    pub pd0: Var,
    pub pd1: Var,
    pub scores: Var,
}

struct Cursor<'a> {
    vars: &'a [Var],
    at: usize,
}

impl Cursor<'_> {
    fn next(&mut self) -> Var {
        self.at += 1;
        self.vars[self.at - 1]
    }
}

fn branch(tape: &mut Tape, h: Var, adj: &Arc<SparseRows>, w: [Var; 3]) -> Var {
    let own = tape.matmul(h, w[0]);
    let nbr = tape.sparse(adj.clone(), h);
    let msg = tape.matmul(nbr, w[1]);
    let sum = tape.add(own, msg);
    let pre = tape.add_row(sum, w[2]);
    tape.relu(pre)
}

fn mlp(tape: &mut Tape, x: Var, c: &mut Cursor) -> Var {
    let (w1, b1, w2, b2) = (c.next(), c.next(), c.next(), c.next());
    let h = tape.matmul(x, w1);
    let h = tape.add_row(h, b1);
    let h = tape.relu(h);
    let o = tape.matmul(h, w2);
    tape.add_row(o, b2)
}

fn point_head(tape: &mut Tape, x: Var, c: &mut Cursor) -> Var {
    let raw = mlp(tape, x, c);
    let sq = tape.sigmoid(raw);
    tape.min_max(sq)
}

/// Fused edge embeddings after the last layer.
pub fn embed(ms: &ModelState, bound: &Bound, tape: &mut Tape, input: &GraphInput) -> Var {
    let mut c = Cursor {
        vars: &bound.vars,
        at: 0,
    };
    embed_with(ms, &mut c, tape, input)
}

fn embed_with(ms: &ModelState, c: &mut Cursor, tape: &mut Tape, input: &GraphInput) -> Var {
    let mut h = tape.leaf(input.h0.clone());
    for _ in 0..ms.config.layers {
        let so = [c.next(), c.next(), c.next()];
        let si = if ms.config.shared_branches {
            so
        } else {
            [c.next(), c.next(), c.next()]
        };
        let (fuse, fuse_b) = (c.next(), c.next());
        let h_so = branch(tape, h, &input.source, so);
        let h_si = branch(tape, h, &input.sink, si);
        let cat = tape.concat(h_so, h_si);
        let f = tape.matmul(cat, fuse);
        let f = tape.add_row(f, fuse_b);
        h = tape.relu(f);
    }
    h
}

/// Runs the network and all three heads.
pub fn forward(ms: &ModelState, bound: &Bound, tape: &mut Tape, input: &GraphInput) -> Outputs {
    let mut c = Cursor {
        vars: &bound.vars,
        at: 0,
    };
    let h = embed_with(ms, &mut c, tape, input);
    let pd0 = point_head(tape, h, &mut c);
    let agg = tape.sparse(input.weighted.clone(), h);
    let pd1 = point_head(tape, agg, &mut c);
    let pooled = match ms.config.pooling {
        Pooling::Max => tape.max_pool(h),
        Pooling::Mean => tape.mean_pool(h),
    };
    let scores = mlp(tape, pooled, &mut c);
    Outputs {
        embeddings: h,
        pd0,
        pd1,
        scores,
    }
}

fn rows_to_points(x: &Array2<f64>) -> Vec<(f64, f64)> {
    x.rows().into_iter().map(|r| (r[0], r[1])).collect()
}

/// Fused embeddings (E × hidden) for a graph given its two line graphs.
pub fn sslgnn_forward(
    ms: &ModelState,
    so: &LineGraph,
    si: &LineGraph,
    h0: &Array2<f64>,
) -> Result<Array2<f64>> {
    let input = GraphInput::from_line_graphs(so, si, h0.clone())?;
    let mut tape = Tape::new();
    let bound = Bound::new(ms, &mut tape);
    let h = embed(ms, &bound, &mut tape, &input);
    Ok(tape.value(h).clone())
}

fn head_offset(ms: &ModelState, head: &str) -> usize {
    ms.params
        .iter()
        .position(|p| p.name == format!("{head}.w1"))
        .expect("head exists")
}

fn check_width(ms: &ModelState, h: &Array2<f64>) -> Result<()> {
    if h.ncols() != ms.config.hidden {
        return Err(NnError::Shape(format!(
            "embeddings have {} columns, model hidden dim is {}",
            h.ncols(),
            ms.config.hidden
        )));
    }
    Ok(())
}

fn run_head(ms: &ModelState, head: &str, x: Array2<f64>, points: bool) -> Array2<f64> {
    let mut tape = Tape::new();
    let bound = Bound::new(ms, &mut tape);
    let x = tape.leaf(x);
    let mut c = Cursor {
        vars: &bound.vars,
        at: head_offset(ms, head),
    };
    let out = if points {
        point_head(&mut tape, x, &mut c)
    } else {
        mlp(&mut tape, x, &mut c)
    };
    tape.value(out).clone()
}

/// One `(birth, death)` point per edge from fused embeddings `h`.
pub fn predict_pd0(ms: &ModelState, h: &Array2<f64>) -> Result<Vec<(f64, f64)>> {
    check_width(ms, h)?;
    Ok(rows_to_points(&run_head(ms, "pd0", h.clone(), true)))
}

/// One candidate degree-1 point per edge.
pub fn predict_pd1(
    ms: &ModelState,
    input: &GraphInput,
    h: &Array2<f64>,
) -> Result<Vec<(f64, f64)>> {
    check_width(ms, h)?;
    if h.nrows() != input.edge_count() {
        return Err(NnError::Shape(format!(
            "embeddings have {} rows for a graph with {} edges",
            h.nrows(),
            input.edge_count()
        )));
    }
    Ok(rows_to_points(&run_head(
        ms,
        "pd1",
        input.weighted.apply(h),
        true,
    )))
}

/// Class scores (logits) from pooled embeddings.
pub fn predict_label(ms: &ModelState, h: &Array2<f64>) -> Result<Vec<f64>> {
    check_width(ms, h)?;
    if h.nrows() == 0 {
        return Err(NnError::Core(dowker_core::Error::EmptyGraph));
    }
    let pooled = match ms.config.pooling {
        Pooling::Max => h.fold_axis(ndarray::Axis(0), f64::NEG_INFINITY, |a, &b| a.max(b)),
        Pooling::Mean => h.mean_axis(ndarray::Axis(0)).expect("non-empty"),
    };
    let out = run_head(ms, "label", pooled.insert_axis(ndarray::Axis(0)), false);
    Ok(out.row(0).to_vec())
}

/// Full prediction for one graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub pd0: Vec<(f64, f64)>,
    pub pd1: Vec<(f64, f64)>,
    pub scores: Vec<f64>,
    pub label: usize,
}

pub fn predict(ms: &ModelState, input: &GraphInput) -> Prediction {
    let mut tape = Tape::new();
    let bound = Bound::new(ms, &mut tape);
    let out = forward(ms, &bound, &mut tape, input);
    let scores = tape.value(out.scores).row(0).to_vec();
    let label = argmax(&scores);
    Prediction {
        pd0: rows_to_points(tape.value(out.pd0)),
        pd1: rows_to_points(tape.value(out.pd1)),
        scores,
        label,
    }
}

/// Index of the largest score; ties go to the lowest index.
pub fn argmax(scores: &[f64]) -> usize {
    scores
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &s)| {
            if s > best.1 {
                (i, s)
            } else {
                best
            }
        })
        .0
}
