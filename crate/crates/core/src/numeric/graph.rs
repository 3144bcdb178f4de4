//! Define-by-run computation graph with reverse-mode differentiation.
//!
//! Every operation evaluates eagerly when it is appended, and the node keeps
//! its value. [`Graph::forward`] re-evaluates all derived nodes in insertion
//! order (which is a topological order), so leaf values may be rebound and
//! the graph replayed; the finite-difference checker relies on this.

use std::collections::HashMap;

use super::crf::CrfScores;
use super::tensor::{log_sum_exp, sigmoid, Tensor};
use super::NumericError;

/// Handle to a node in a [`Graph`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Identifies a trainable tensor in an external parameter store.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParamId(pub usize);

#[derive(Clone, Debug)]
enum Op {
    Input,
    Param(ParamId),
    MatMul(Var, Var),
    Add(Var, Var),
    AddRow(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Scale(Var, f64),
    OneMinus(Var),
    Sigmoid(Var),
    Tanh(Var),
    Relu(Var),
    Concat(Vec<Var>),
    Stack(Vec<Var>),
    SliceCols { x: Var, start: usize, len: usize },
    Row { x: Var, index: usize },
    Softmax(Var),
    LogSumExp(Var),
    Gather { table: Var, indices: Vec<usize> },
    Mask { x: Var, mask: Tensor },
    Sum(Var),
    Mean(Var),
    SoftmaxNll { logits: Var, gold: Vec<usize> },
    CrfNll { emissions: Var, transitions: Var, begin: Var, end: Var, gold: Vec<usize> },
}

#[derive(Clone, Debug)]
struct Node {
    op: Op,
    value: Tensor,
}

/// A single-threaded tape of tensor operations.
#[derive(Clone, Debug, Default)]
pub struct Graph {
    nodes: Vec<Node>,
    params: HashMap<ParamId, Var>,
    grads: Option<Vec<Option<Tensor>>>,
}

fn shape_err(op: &'static str, left: &Tensor, right: &Tensor) -> NumericError {
    NumericError::Shape {
        op,
        left: left.shape(),
        right: right.shape(),
    }
}

fn zip_same(
    op: &'static str,
    a: &Tensor,
    b: &Tensor,
    f: impl Fn(f64, f64) -> f64,
) -> Result<Tensor, NumericError> {
    if a.shape() != b.shape() {
        return Err(shape_err(op, a, b));
    }
    let data = a.data().iter().zip(b.data()).map(|(&x, &y)| f(x, y)).collect();
    Tensor::from_vec(a.rows(), a.cols(), data)
}

fn softmax_rows(x: &Tensor) -> Tensor {
    let mut out = x.clone();
    for r in 0..x.rows() {
        let lse = log_sum_exp(x.row_slice(r));
        for v in out.row_slice_mut(r) {
            *v = (*v - lse).exp();
        }
    }
    out
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    fn val(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    fn push(&mut self, op: Op) -> Result<Var, NumericError> {
        let value = self.eval(&op)?;
        self.nodes.push(Node { op, value });
        Ok(Var(self.nodes.len() - 1))
    }

    /// Constant leaf.
    pub fn input(&mut self, value: Tensor) -> Var {
        self.nodes.push(Node {
            op: Op::Input,
            value,
        });
        Var(self.nodes.len() - 1)
    }

    /// Leaf bound to a trainable tensor. Binding the same id twice returns
    /// the existing node, so gradients of shared parameters accumulate.
    pub fn param(&mut self, id: ParamId, value: &Tensor) -> Var {
        if let Some(&v) = self.params.get(&id) {
            return v;
        }
        self.nodes.push(Node {
            op: Op::Param(id),
            value: value.clone(),
        });
        let v = Var(self.nodes.len() - 1);
        self.params.insert(id, v);
        v
    }

    /// Parameter bound to `v`, if any.
    pub fn param_id(&self, v: Var) -> Option<ParamId> {
        match self.nodes[v.0].op {
            Op::Param(id) => Some(id),
            _ => None,
        }
    }

    pub fn is_leaf(&self, v: Var) -> bool {
        matches!(self.nodes[v.0].op, Op::Input | Op::Param(_))
    }

    /// Rebinds a leaf value. Call [`Graph::forward`] afterwards to refresh
    /// derived nodes.
    pub fn set_leaf(&mut self, v: Var, value: Tensor) -> Result<(), NumericError> {
        let node = &mut self.nodes[v.0];
        if !matches!(node.op, Op::Input | Op::Param(_)) {
            return Err(NumericError::NotALeaf(v.0));
        }
        if node.value.shape() != value.shape() {
            return Err(shape_err("set_leaf", &node.value, &value));
        }
        node.value = value;
        self.grads = None;
        Ok(())
    }

    /// Re-evaluates every derived node in topological order.
    pub fn forward(&mut self) -> Result<(), NumericError> {
        for i in 0..self.nodes.len() {
            if matches!(self.nodes[i].op, Op::Input | Op::Param(_)) {
                continue;
            }
            let value = self.eval(&self.nodes[i].op)?;
            self.nodes[i].value = value;
        }
        self.grads = None;
        Ok(())
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var, NumericError> {
        self.push(Op::MatMul(a, b))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var, NumericError> {
        self.push(Op::Add(a, b))
    }

    /// Adds a `1 × c` row to every row of an `r × c` matrix.
    pub fn add_row(&mut self, a: Var, row: Var) -> Result<Var, NumericError> {
        self.push(Op::AddRow(a, row))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var, NumericError> {
        self.push(Op::Sub(a, b))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var, NumericError> {
        self.push(Op::Mul(a, b))
    }

    pub fn scale(&mut self, a: Var, factor: f64) -> Result<Var, NumericError> {
        self.push(Op::Scale(a, factor))
    }

    /// `1 − x`, elementwise.
    pub fn one_minus(&mut self, a: Var) -> Result<Var, NumericError> {
        self.push(Op::OneMinus(a))
    }

    pub fn sigmoid(&mut self, a: Var) -> Result<Var, NumericError> {
        self.push(Op::Sigmoid(a))
    }

    pub fn tanh(&mut self, a: Var) -> Result<Var, NumericError> {
        self.push(Op::Tanh(a))
    }

    pub fn relu(&mut self, a: Var) -> Result<Var, NumericError> {
        self.push(Op::Relu(a))
    }

    /// Column-wise concatenation of matrices with equal row counts.
    pub fn concat(&mut self, parts: &[Var]) -> Result<Var, NumericError> {
        self.push(Op::Concat(parts.to_vec()))
    }

    /// Row-wise stacking of matrices with equal column counts.
    pub fn stack(&mut self, parts: &[Var]) -> Result<Var, NumericError> {
        self.push(Op::Stack(parts.to_vec()))
    }

    pub fn slice_cols(&mut self, x: Var, start: usize, len: usize) -> Result<Var, NumericError> {
        self.push(Op::SliceCols { x, start, len })
    }

    pub fn row(&mut self, x: Var, index: usize) -> Result<Var, NumericError> {
        self.push(Op::Row { x, index })
    }

    /// Row-wise softmax.
    pub fn softmax(&mut self, x: Var) -> Result<Var, NumericError> {
        self.push(Op::Softmax(x))
    }

    /// Row-wise log-sum-exp, producing an `r × 1` column.
    pub fn log_sum_exp(&mut self, x: Var) -> Result<Var, NumericError> {
        self.push(Op::LogSumExp(x))
    }

    /// Row lookup: output row `i` is `table[indices[i]]`.
    pub fn gather(&mut self, table: Var, indices: Vec<usize>) -> Result<Var, NumericError> {
        self.push(Op::Gather { table, indices })
    }

    /// Elementwise product with a constant mask (dropout).
    pub fn mask(&mut self, x: Var, mask: Tensor) -> Result<Var, NumericError> {
        self.push(Op::Mask { x, mask })
    }

    pub fn sum(&mut self, x: Var) -> Result<Var, NumericError> {
        self.push(Op::Sum(x))
    }

    pub fn mean(&mut self, x: Var) -> Result<Var, NumericError> {
        self.push(Op::Mean(x))
    }

    /// Mean over rows of `−log softmax(logits)[row, gold[row]]`.
    pub fn softmax_nll(&mut self, logits: Var, gold: Vec<usize>) -> Result<Var, NumericError> {
        self.push(Op::SoftmaxNll { logits, gold })
    }

    /// Linear-chain CRF negative log-likelihood `log Z − score(gold)`.
    pub fn crf_nll(
        &mut self,
        emissions: Var,
        transitions: Var,
        begin: Var,
        end: Var,
        gold: Vec<usize>,
    ) -> Result<Var, NumericError> {
        self.push(Op::CrfNll {
            emissions,
            transitions,
            begin,
            end,
            gold,
        })
    }

    fn eval(&self, op: &Op) -> Result<Tensor, NumericError> {
        let (name, out) = match op {
            Op::Input | Op::Param(_) => unreachable!("leaves are never re-evaluated"),
            Op::MatMul(a, b) => ("matmul", self.val(*a).matmul(self.val(*b))?),
            Op::Add(a, b) => ("add", zip_same("add", self.val(*a), self.val(*b), |x, y| x + y)?),
            Op::Sub(a, b) => ("sub", zip_same("sub", self.val(*a), self.val(*b), |x, y| x - y)?),
            Op::Mul(a, b) => ("mul", zip_same("mul", self.val(*a), self.val(*b), |x, y| x * y)?),
            Op::AddRow(a, r) => {
                let (a, r) = (self.val(*a), self.val(*r));
                if r.rows() != 1 || r.cols() != a.cols() {
                    return Err(shape_err("add_row", a, r));
                }
                let mut out = a.clone();
                for i in 0..a.rows() {
                    for (o, b) in out.row_slice_mut(i).iter_mut().zip(r.data()) {
                        *o += b;
                    }
                }
                ("add_row", out)
            }
            Op::Scale(a, s) => ("scale", self.val(*a).map(|x| x * s)),
            Op::OneMinus(a) => ("one_minus", self.val(*a).map(|x| 1.0 - x)),
            Op::Sigmoid(a) => ("sigmoid", self.val(*a).map(sigmoid)),
            Op::Tanh(a) => ("tanh", self.val(*a).map(f64::tanh)),
            Op::Relu(a) => ("relu", self.val(*a).map(|x| x.max(0.0))),
            Op::Concat(parts) => {
                let rows = parts.first().map_or(0, |p| self.val(*p).rows());
                let mut cols = 0;
                for p in parts {
                    let t = self.val(*p);
                    if t.rows() != rows {
                        return Err(shape_err("concat", self.val(parts[0]), t));
                    }
                    cols += t.cols();
                }
                let mut data = Vec::with_capacity(rows * cols);
                for r in 0..rows {
                    for p in parts {
                        data.extend_from_slice(self.val(*p).row_slice(r));
                    }
                }
                ("concat", Tensor::from_vec(rows, cols, data)?)
            }
            Op::Stack(parts) => {
                let cols = parts.first().map_or(0, |p| self.val(*p).cols());
                let mut data = Vec::new();
                let mut rows = 0;
                for p in parts {
                    let t = self.val(*p);
                    if t.cols() != cols {
                        return Err(shape_err("stack", self.val(parts[0]), t));
                    }
                    rows += t.rows();
                    data.extend_from_slice(t.data());
                }
                ("stack", Tensor::from_vec(rows, cols, data)?)
            }
            Op::SliceCols { x, start, len } => {
                let x = self.val(*x);
                if start + len > x.cols() {
                    return Err(NumericError::Index {
                        op: "slice_cols",
                        index: start + len,
                        extent: x.cols(),
                    });
                }
                let mut data = Vec::with_capacity(x.rows() * len);
                for r in 0..x.rows() {
                    data.extend_from_slice(&x.row_slice(r)[*start..start + len]);
                }
                ("slice_cols", Tensor::from_vec(x.rows(), *len, data)?)
            }
            Op::Row { x, index } => {
                let x = self.val(*x);
                if *index >= x.rows() {
                    return Err(NumericError::Index {
                        op: "row",
                        index: *index,
                        extent: x.rows(),
                    });
                }
                ("row", Tensor::row(x.row_slice(*index)))
            }
            Op::Softmax(x) => ("softmax", softmax_rows(self.val(*x))),
            Op::LogSumExp(x) => {
                let x = self.val(*x);
                let data = (0..x.rows()).map(|r| log_sum_exp(x.row_slice(r))).collect();
                ("log_sum_exp", Tensor::from_vec(x.rows(), 1, data)?)
            }
            Op::Gather { table, indices } => {
                let t = self.val(*table);
                let mut data = Vec::with_capacity(indices.len() * t.cols());
                for &i in indices {
                    if i >= t.rows() {
                        return Err(NumericError::Index {
                            op: "gather",
                            index: i,
                            extent: t.rows(),
                        });
                    }
                    data.extend_from_slice(t.row_slice(i));
                }
                ("gather", Tensor::from_vec(indices.len(), t.cols(), data)?)
            }
            Op::Mask { x, mask } => ("mask", zip_same("mask", self.val(*x), mask, |a, m| a * m)?),
            Op::Sum(x) => ("sum", Tensor::scalar(self.val(*x).sum())),
            Op::Mean(x) => {
                let x = self.val(*x);
                ("mean", Tensor::scalar(x.sum() / x.len().max(1) as f64))
            }
            Op::SoftmaxNll { logits, gold } => {
                let x = self.val(*logits);
                check_gold("softmax_nll", x, gold)?;
                let total: f64 = gold
                    .iter()
                    .enumerate()
                    .map(|(t, &g)| log_sum_exp(x.row_slice(t)) - x.get(t, g))
                    .sum();
                ("softmax_nll", Tensor::scalar(total / gold.len() as f64))
            }
            Op::CrfNll {
                emissions,
                transitions,
                begin,
                end,
                gold,
            } => {
                let s = self.crf_scores(*emissions, *transitions, *begin, *end)?;
                check_gold("crf_nll", s.emissions, gold)?;
                ("crf_nll", Tensor::scalar(s.log_partition() - s.path_score(gold)))
            }
        };
        if !out.is_finite() {
            return Err(NumericError::NonFinite { op: name });
        }
        Ok(out)
    }

    fn crf_scores(&self, e: Var, tr: Var, b: Var, en: Var) -> Result<CrfScores<'_>, NumericError> {
        let s = CrfScores {
            emissions: self.val(e),
            transitions: self.val(tr),
            begin: self.val(b),
            end: self.val(en),
        };
        if !s.shapes_agree() {
            return Err(shape_err("crf_nll", s.emissions, s.transitions));
        }
        Ok(s)
    }

    /// Runs reverse-mode accumulation from a scalar `loss`.
    ///
    /// A graph can be differentiated once; rebinding a leaf or calling
    /// [`Graph::forward`] resets that state.
    pub fn backward(&mut self, loss: Var) -> Result<(), NumericError> {
        if self.grads.is_some() {
            return Err(NumericError::BackwardTwice);
        }
        let shape = self.val(loss).shape();
        if shape != [1, 1] {
            return Err(NumericError::NonScalarLoss(shape));
        }
        let mut grads: Vec<Option<Tensor>> = vec![None; self.nodes.len()];
        grads[loss.0] = Some(Tensor::scalar(1.0));
        for i in (0..=loss.0).rev() {
            let Some(g) = grads[i].take() else { continue };
            if !g.is_finite() {
                return Err(NumericError::NonFiniteAdjoint(i));
            }
            self.propagate(i, &g, &mut grads)?;
            grads[i] = Some(g);
        }
        self.grads = Some(grads);
        Ok(())
    }

    /// Adjoint of `v` after [`Graph::backward`]; `None` when `v` does not
    /// influence the loss.
    pub fn grad(&self, v: Var) -> Option<&Tensor> {
        self.grads.as_ref()?.get(v.0)?.as_ref()
    }

    /// Gradients of every bound parameter that influences the loss,
    /// ordered by parameter id.
    pub fn param_grads(&self) -> Vec<(ParamId, Tensor)> {
        let mut out: Vec<(ParamId, Tensor)> = self
            .params
            .iter()
            .filter_map(|(&id, &v)| self.grad(v).map(|g| (id, g.clone())))
            .collect();
        out.sort_by_key(|(id, _)| *id);
        out
    }

    /// Leaf vars of all bound parameters, ordered by parameter id.
    pub fn param_vars(&self) -> Vec<(ParamId, Var)> {
        let mut out: Vec<(ParamId, Var)> = self.params.iter().map(|(&i, &v)| (i, v)).collect();
        out.sort_by_key(|(id, _)| *id);
        out
    }

    fn propagate(
        &self,
        i: usize,
        g: &Tensor,
        grads: &mut [Option<Tensor>],
    ) -> Result<(), NumericError> {
        fn acc(grads: &mut [Option<Tensor>], v: Var, delta: Tensor) {
            match &mut grads[v.0] {
                Some(existing) => existing.add_assign(&delta),
                slot @ None => *slot = Some(delta),
            }
        }
        let node = &self.nodes[i];
        match &node.op {
            Op::Input | Op::Param(_) => {}
            Op::MatMul(a, b) => {
                let da = g.matmul(&self.val(*b).transpose())?;
                let db = self.val(*a).transpose().matmul(g)?;
                acc(grads, *a, da);
                acc(grads, *b, db);
            }
            Op::Add(a, b) => {
                acc(grads, *a, g.clone());
                acc(grads, *b, g.clone());
            }
            Op::AddRow(a, r) => {
                let mut dr = Tensor::zeros(1, g.cols());
                for row in 0..g.rows() {
                    for (d, x) in dr.data_mut().iter_mut().zip(g.row_slice(row)) {
                        *d += x;
                    }
                }
                acc(grads, *a, g.clone());
                acc(grads, *r, dr);
            }
            Op::Sub(a, b) => {
                acc(grads, *a, g.clone());
                acc(grads, *b, g.map(|x| -x));
            }
            Op::Mul(a, b) => {
                let da = zip_same("mul", g, self.val(*b), |x, y| x * y)?;
                let db = zip_same("mul", g, self.val(*a), |x, y| x * y)?;
                acc(grads, *a, da);
                acc(grads, *b, db);
            }
            Op::Scale(a, s) => acc(grads, *a, g.map(|x| x * s)),
            Op::OneMinus(a) => acc(grads, *a, g.map(|x| -x)),
            Op::Sigmoid(a) => {
                let d = zip_same("sigmoid", g, &node.value, |x, y| x * y * (1.0 - y))?;
                acc(grads, *a, d);
            }
            Op::Tanh(a) => {
                let d = zip_same("tanh", g, &node.value, |x, y| x * (1.0 - y * y))?;
                acc(grads, *a, d);
            }
            Op::Relu(a) => {
                let d = zip_same("relu", g, &node.value, |x, y| if y > 0.0 { x } else { 0.0 })?;
                acc(grads, *a, d);
            }
            Op::Concat(parts) => {
                let mut offset = 0;
                for p in parts {
                    let cols = self.val(*p).cols();
                    let mut d = Tensor::zeros(g.rows(), cols);
                    for r in 0..g.rows() {
                        d.row_slice_mut(r)
                            .copy_from_slice(&g.row_slice(r)[offset..offset + cols]);
                    }
                    offset += cols;
                    acc(grads, *p, d);
                }
            }
            Op::Stack(parts) => {
                let mut offset = 0;
                for p in parts {
                    let t = self.val(*p);
                    let n = t.len();
                    let d = Tensor::from_vec(t.rows(), t.cols(), g.data()[offset..offset + n].to_vec())?;
                    offset += n;
                    acc(grads, *p, d);
                }
            }
            Op::SliceCols { x, start, len } => {
                let src = self.val(*x);
                let mut d = Tensor::zeros(src.rows(), src.cols());
                for r in 0..src.rows() {
                    d.row_slice_mut(r)[*start..start + len].copy_from_slice(g.row_slice(r));
                }
                acc(grads, *x, d);
            }
            Op::Row { x, index } => {
                let src = self.val(*x);
                let mut d = Tensor::zeros(src.rows(), src.cols());
                d.row_slice_mut(*index).copy_from_slice(g.data());
                acc(grads, *x, d);
            }
            Op::Softmax(x) => {
                let y = &node.value;
                let mut d = Tensor::zeros(y.rows(), y.cols());
                for r in 0..y.rows() {
                    let yr = y.row_slice(r);
                    let gr = g.row_slice(r);
                    let dot: f64 = yr.iter().zip(gr).map(|(a, b)| a * b).sum();
                    for ((o, &yv), &gv) in d.row_slice_mut(r).iter_mut().zip(yr).zip(gr) {
                        *o = yv * (gv - dot);
                    }
                }
                acc(grads, *x, d);
            }
            Op::LogSumExp(x) => {
                let mut d = softmax_rows(self.val(*x));
                for r in 0..d.rows() {
                    let gr = g.get(r, 0);
                    d.row_slice_mut(r).iter_mut().for_each(|v| *v *= gr);
                }
                acc(grads, *x, d);
            }
            Op::Gather { table, indices } => {
                let t = self.val(*table);
                let mut d = Tensor::zeros(t.rows(), t.cols());
                for (r, &i) in indices.iter().enumerate() {
                    for (o, v) in d.row_slice_mut(i).iter_mut().zip(g.row_slice(r)) {
                        *o += v;
                    }
                }
                acc(grads, *table, d);
            }
            Op::Mask { x, mask } => acc(grads, *x, zip_same("mask", g, mask, |a, m| a * m)?),
            Op::Sum(x) => {
                let s = self.val(*x);
                acc(grads, *x, Tensor::filled(s.rows(), s.cols(), g.item()));
            }
            Op::Mean(x) => {
                let s = self.val(*x);
                let n = s.len().max(1) as f64;
                acc(grads, *x, Tensor::filled(s.rows(), s.cols(), g.item() / n));
            }
            Op::SoftmaxNll { logits, gold } => {
                let mut d = softmax_rows(self.val(*logits));
                let scale = g.item() / gold.len() as f64;
                for (t, &y) in gold.iter().enumerate() {
                    let cur = d.get(t, y);
                    d.set(t, y, cur - 1.0);
                }
                d.scale_in_place(scale);
                acc(grads, *logits, d);
            }
            Op::CrfNll {
                emissions,
                transitions,
                begin,
                end,
                gold,
            } => {
                let s = self.crf_scores(*emissions, *transitions, *begin, *end)?;
                let (mut node_m, mut pair_m, _) = s.marginals();
                let l = s.num_labels();
                let t_len = s.len();
                let mut d_begin = Tensor::row(node_m.row_slice(0));
                let mut d_end = Tensor::row(node_m.row_slice(t_len - 1));
                for (t, &y) in gold.iter().enumerate() {
                    let cur = node_m.get(t, y);
                    node_m.set(t, y, cur - 1.0);
                    if t > 0 {
                        let p = gold[t - 1];
                        let cur = pair_m.get(p, y);
                        pair_m.set(p, y, cur - 1.0);
                    }
                }
                let cur = d_begin.get(0, gold[0]);
                d_begin.set(0, gold[0], cur - 1.0);
                let cur = d_end.get(0, gold[t_len - 1]);
                d_end.set(0, gold[t_len - 1], cur - 1.0);
                let gs = g.item();
                for t in [&mut node_m, &mut pair_m, &mut d_begin, &mut d_end] {
                    t.scale_in_place(gs);
                }
                debug_assert_eq!(pair_m.shape(), [l, l]);
                acc(grads, *emissions, node_m);
                acc(grads, *transitions, pair_m);
                acc(grads, *begin, d_begin);
                acc(grads, *end, d_end);
            }
        }
        Ok(())
    }
}

fn check_gold(op: &'static str, scores: &Tensor, gold: &[usize]) -> Result<(), NumericError> {
    if gold.is_empty() || gold.len() != scores.rows() {
        return Err(NumericError::Index {
            op,
            index: gold.len(),
            extent: scores.rows(),
        });
    }
    if let Some(&bad) = gold.iter().find(|&&g| g >= scores.cols()) {
        return Err(NumericError::Index {
            op,
            index: bad,
            extent: scores.cols(),
        });
    }
    Ok(())
}
