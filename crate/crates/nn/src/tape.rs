//! A small reverse-mode differentiation tape over dense `f64` matrices.
//!
//! Every operation appends a node holding its value and enough context to
//! push gradients back to its inputs. [`Tape::backward`] walks the nodes in
//! reverse once.

use std::sync::Arc;

use dowker_core::metrics::{optimal_matching, Matching, Slot};
use ndarray::{s, Array2, Axis};

pub type Var = usize;

/// Row-sparse linear operator: `out[u] = Σ coef · x[v]` over `rows[u]`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SparseRows {
    pub rows: Vec<Vec<(usize, f64)>>,
}

impl SparseRows {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn apply(&self, x: &Array2<f64>) -> Array2<f64> {
        let mut out = Array2::zeros((self.rows.len(), x.ncols()));
        for (u, row) in self.rows.iter().enumerate() {
            let mut dst = out.row_mut(u);
            for &(v, c) in row {
                dst.scaled_add(c, &x.row(v));
            }
        }
        out
    }

    fn apply_transpose_into(&self, g: &Array2<f64>, acc: &mut Array2<f64>) {
        for (u, row) in self.rows.iter().enumerate() {
            let src = g.row(u);
            for &(v, c) in row {
                acc.row_mut(v).scaled_add(c, &src);
            }
        }
    }
}

#[derive(Debug)]
enum Op {
    Leaf,
    MatMul(Var, Var),
    Add(Var, Var),
    AddRow(Var, Var),
    Relu(Var),
    Sigmoid(Var),
    Concat(Var, Var),
    Sparse(Arc<SparseRows>, Var),
    /// Per row: `true` when the two columns were swapped.
    MinMax(Var, Vec<bool>),
    MaxPool(Var, Vec<usize>),
    MeanPool(Var),
    Scale(Var, f64),
    Sum(Vec<Var>),
    Wd2 {
        pred: Var,
        targets: Arc<Vec<(f64, f64)>>,
        matching: Matching,
    },
    CrossEntropy {
        logits: Var,
        label: usize,
        probs: Vec<f64>,
    },
}

struct Node {
    value: Array2<f64>,
    op: Op,
}

#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

impl Tape {
    pub fn new() -> Self {
        Tape::default()
    }

    fn push(&mut self, value: Array2<f64>, op: Op) -> Var {
        self.nodes.push(Node { value, op });
        self.nodes.len() - 1
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &Array2<f64> {
        &self.nodes[v].value
    }

    pub fn scalar(&self, v: Var) -> f64 {
        let x = &self.nodes[v].value;
        debug_assert_eq!(x.dim(), (1, 1));
        x[[0, 0]]
    }

    pub fn leaf(&mut self, value: Array2<f64>) -> Var {
        self.push(value, Op::Leaf)
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Var {
        let v = self.value(a).dot(self.value(b));
        self.push(v, Op::MatMul(a, b))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        let v = self.value(a) + self.value(b);
        self.push(v, Op::Add(a, b))
    }

    /// `a + row`, broadcasting a `1 × k` row over every row of `a`.
    pub fn add_row(&mut self, a: Var, row: Var) -> Var {
        assert_eq!(self.value(row).nrows(), 1, "add_row expects a 1 × k row");
        let v = self.value(a) + self.value(row);
        self.push(v, Op::AddRow(a, row))
    }

    pub fn relu(&mut self, a: Var) -> Var {
        let v = self.value(a).mapv(|x| x.max(0.0));
        self.push(v, Op::Relu(a))
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        let v = self.value(a).mapv(|x| 1.0 / (1.0 + (-x).exp()));
        self.push(v, Op::Sigmoid(a))
    }

    pub fn concat(&mut self, a: Var, b: Var) -> Var {
        let v = ndarray::concatenate(Axis(1), &[self.value(a).view(), self.value(b).view()])
            .expect("concat operands share row count");
        self.push(v, Op::Concat(a, b))
    }

    pub fn sparse(&mut self, op: Arc<SparseRows>, x: Var) -> Var {
        let v = op.apply(self.value(x));
        self.push(v, Op::Sparse(op, x))
    }

    /// Reorders each row of an `n × 2` matrix to `(min, max)`.
    pub fn min_max(&mut self, a: Var) -> Var {
        let x = self.value(a);
        assert_eq!(x.ncols(), 2, "min_max expects two columns");
        let mut v = x.clone();
        let mut swapped = Vec::with_capacity(x.nrows());
        for mut row in v.rows_mut() {
            let s = row[0] > row[1];
            if s {
                row.swap(0, 1);
            }
            swapped.push(s);
        }
        self.push(v, Op::MinMax(a, swapped))
    }

    /// Column-wise max over rows; ties go to the first row.
    pub fn max_pool(&mut self, a: Var) -> Var {
        let x = self.value(a);
        assert!(x.nrows() > 0, "pooling an empty matrix");
        let mut arg = vec![0usize; x.ncols()];
        let mut v = Array2::zeros((1, x.ncols()));
        for (c, col) in x.columns().into_iter().enumerate() {
            let mut best = col[0];
            for (r, &val) in col.iter().enumerate().skip(1) {
                if val > best {
                    best = val;
                    arg[c] = r;
                }
            }
            v[[0, c]] = best;
        }
        self.push(v, Op::MaxPool(a, arg))
    }

    pub fn mean_pool(&mut self, a: Var) -> Var {
        let x = self.value(a);
        assert!(x.nrows() > 0, "pooling an empty matrix");
        let v = x
            .mean_axis(Axis(0))
            .expect("non-empty")
            .insert_axis(Axis(0));
        self.push(v, Op::MeanPool(a))
    }

    pub fn scale(&mut self, a: Var, c: f64) -> Var {
        let v = self.value(a) * c;
        self.push(v, Op::Scale(a, c))
    }

    /// Sum of `1 × 1` scalars.
    pub fn sum(&mut self, terms: Vec<Var>) -> Var {
        let total: f64 = terms.iter().map(|&t| self.scalar(t)).sum();
        self.push(Array2::from_elem((1, 1), total), Op::Sum(terms))
    }

    /// Squared 2-Wasserstein cost between the `n × 2` predicted points and a
    /// fixed target set. The optimal matching is computed here and held
    /// fixed for the backward pass.
    pub fn wd2(&mut self, pred: Var, targets: Arc<Vec<(f64, f64)>>) -> Var {
        let pts: Vec<(f64, f64)> = self
            .value(pred)
            .rows()
            .into_iter()
            .map(|r| (r[0], r[1]))
            .collect();
        let (cost, matching) = optimal_matching(&pts, &targets);
        self.push(
            Array2::from_elem((1, 1), cost),
            Op::Wd2 {
                pred,
                targets,
                matching,
            },
        )
    }

    /// Softmax cross-entropy of a `1 × C` logit row.
    pub fn cross_entropy(&mut self, logits: Var, label: usize) -> Var {
        let z = self.value(logits);
        assert_eq!(z.nrows(), 1);
        let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = z.iter().map(|&x| (x - m).exp()).collect();
        let norm: f64 = exps.iter().sum();
        let probs: Vec<f64> = exps.iter().map(|e| e / norm).collect();
        let loss = -(z[[0, label]] - m - norm.ln());
        self.push(
            Array2::from_elem((1, 1), loss),
            Op::CrossEntropy {
                logits,
                label,
                probs,
            },
        )
    }

    /// Smallest distance of any recorded input to a point where an
    /// operation is not differentiable: ReLU inputs from zero, min/max
    /// column gaps, and gaps between the top two positive entries of a
    /// max-pooled column.
    pub fn kink_margin(&self) -> f64 {
        let mut margin = f64::INFINITY;
        for node in &self.nodes {
            match &node.op {
                &Op::Relu(a) => {
                    for &x in self.value(a) {
                        margin = margin.min(x.abs());
                    }
                }
                Op::MinMax(a, _) => {
                    for r in self.value(*a).rows() {
                        margin = margin.min((r[0] - r[1]).abs());
                    }
                }
                Op::MaxPool(a, _) => {
                    for col in self.value(*a).columns() {
                        let mut v: Vec<f64> = col.to_vec();
                        v.sort_by(|x, y| y.total_cmp(x));
                        if v.len() > 1 && v[0] > 0.0 {
                            margin = margin.min(v[0] - v[1]);
                        }
                    }
                }
                _ => {}
            }
        }
        margin
    }

    /// Gradients of the scalar `out` with respect to every node.
    pub fn backward(&self, out: Var) -> Gradients {
        let mut grads: Vec<Option<Array2<f64>>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[out] = Some(Array2::ones(self.value(out).raw_dim()));

        fn acc(grads: &mut [Option<Array2<f64>>], v: Var, g: Array2<f64>) {
            match &mut grads[v] {
                Some(x) => *x += &g,
                slot @ None => *slot = Some(g),
            }
        }

        for idx in (0..=out).rev() {
            let Some(g) = grads[idx].take() else { continue };
            match &self.nodes[idx].op {
                Op::Leaf => {
                    grads[idx] = Some(g);
                    continue;
                }
                &Op::MatMul(a, b) => {
                    let ga = g.dot(&self.value(b).t());
                    let gb = self.value(a).t().dot(&g);
                    acc(&mut grads, a, ga);
                    acc(&mut grads, b, gb);
                }
                &Op::Add(a, b) => {
                    acc(&mut grads, a, g.clone());
                    acc(&mut grads, b, g.clone());
                }
                &Op::AddRow(a, row) => {
                    let gr = g.sum_axis(Axis(0)).insert_axis(Axis(0));
                    acc(&mut grads, row, gr);
                    acc(&mut grads, a, g.clone());
                }
                &Op::Relu(a) => {
                    let mut ga = g.clone();
                    ga.zip_mut_with(self.value(a), |gv, &x| {
                        if x <= 0.0 {
                            *gv = 0.0
                        }
                    });
                    acc(&mut grads, a, ga);
                }
                &Op::Sigmoid(a) => {
                    let mut ga = g.clone();
                    ga.zip_mut_with(&self.nodes[idx].value, |gv, &y| *gv *= y * (1.0 - y));
                    acc(&mut grads, a, ga);
                }
                &Op::Concat(a, b) => {
                    let k = self.value(a).ncols();
                    acc(&mut grads, a, g.slice(s![.., ..k]).to_owned());
                    acc(&mut grads, b, g.slice(s![.., k..]).to_owned());
                }
                Op::Sparse(op, x) => {
                    let mut gx = Array2::zeros(self.value(*x).raw_dim());
                    op.apply_transpose_into(&g, &mut gx);
                    acc(&mut grads, *x, gx);
                }
                Op::MinMax(a, swapped) => {
                    let mut ga = g.clone();
                    for (mut row, &s) in ga.rows_mut().into_iter().zip(swapped) {
                        if s {
                            row.swap(0, 1);
                        }
                    }
                    acc(&mut grads, *a, ga);
                }
                Op::MaxPool(a, arg) => {
                    let mut ga = Array2::zeros(self.value(*a).raw_dim());
                    for (c, &r) in arg.iter().enumerate() {
                        ga[[r, c]] = g[[0, c]];
                    }
                    acc(&mut grads, *a, ga);
                }
                &Op::MeanPool(a) => {
                    let n = self.value(a).nrows();
                    let row = &g / n as f64;
                    let ga = Array2::from_shape_fn(self.value(a).raw_dim(), |(_, c)| row[[0, c]]);
                    acc(&mut grads, a, ga);
                }
                &Op::Scale(a, c) => acc(&mut grads, a, &g * c),
                Op::Sum(terms) => {
                    for &t in terms {
                        acc(&mut grads, t, g.clone());
                    }
                }
                Op::Wd2 {
                    pred,
                    targets,
                    matching,
                } => {
                    let scale = g[[0, 0]];
                    let p = self.value(*pred);
                    let mut gp = Array2::zeros(p.raw_dim());
                    for &(l, r) in &matching.pairs {
                        let Slot::Point(i) = l else { continue };
                        let (b, d) = (p[[i, 0]], p[[i, 1]]);
                        match r {
                            Slot::Point(j) => {
                                let (tb, td) = targets[j];
                                gp[[i, 0]] += scale * 2.0 * (b - tb);
                                gp[[i, 1]] += scale * 2.0 * (d - td);
                            }
                            Slot::Diagonal => {
                                gp[[i, 0]] -= scale * (d - b);
                                gp[[i, 1]] += scale * (d - b);
                            }
                        }
                    }
                    acc(&mut grads, *pred, gp);
                }
                Op::CrossEntropy {
                    logits,
                    label,
                    probs,
                } => {
                    let scale = g[[0, 0]];
                    let mut gz = Array2::zeros((1, probs.len()));
                    for (c, &p) in probs.iter().enumerate() {
                        gz[[0, c]] = scale * (p - if c == *label { 1.0 } else { 0.0 });
                    }
                    acc(&mut grads, *logits, gz);
                }
            }
        }
        Gradients { grads }
    }
}

pub struct Gradients {
    grads: Vec<Option<Array2<f64>>>,
}

impl Gradients {
    /// Gradient of a leaf, or `None` when the output does not depend on it.
    pub fn get(&self, v: Var) -> Option<&Array2<f64>> {
        self.grads[v].as_ref()
    }
}
