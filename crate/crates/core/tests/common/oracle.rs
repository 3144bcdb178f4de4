//! Independent re-implementation of the tagger's loss in double-double
//! arithmetic, used to obtain central differences well below the f64
//! rounding floor. Only addition, subtraction and multiplication of
//! `twofloat` are used; its division and transcendental functions are not
//! accurate to double-double precision.

use std::sync::OnceLock;

use mtl_tagger::network::{Activation, CellKind, Encoded, HeadKind, Tagger};
use twofloat::TwoFloat as D;

fn d(x: f64) -> D {
    D::from(x)
}

/// Long division with two correction steps; `twofloat`'s own quotient
/// is only accurate to f64 precision.
fn div(a: D, b: D) -> D {
    let q1 = a.hi() / b.hi();
    let r = a - b * d(q1);
    let q2 = r.hi() / b.hi();
    let r = r - b * d(q2);
    let q3 = r.hi() / b.hi();
    d(q1) + d(q2) + d(q3)
}

const INV_FACT: usize = 10;

/// `1/k!` for `k < INV_FACT`.
fn inverse_factorials() -> &'static [D; INV_FACT] {
    static TABLE: OnceLock<[D; INV_FACT]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [d(1.0); INV_FACT];
        for k in 1..INV_FACT {
            t[k] = div(t[k - 1], d(k as f64));
        }
        t
    })
}

/// ln 2 split into a leading double and its remainder.
const LN2: (f64, f64) = (0.693_147_180_559_945_3, 2.319_046_813_846_299_6e-17);

/// Reduces by multiples of ln 2, then by 2¹⁰, and sums the Taylor series
/// by Horner's rule.
fn exp(x: D) -> D {
    let n = (x.hi() / LN2.0).round();
    let ln2 = D::try_from(LN2).expect("normalised constant");
    let r = (x - ln2 * d(n)) * d(1.0 / 1024.0);
    let inv = inverse_factorials();
    let mut sum = inv[INV_FACT - 1];
    for k in (0..INV_FACT - 1).rev() {
        sum = sum * r + inv[k];
    }
    for _ in 0..10 {
        sum = sum * sum;
    }
    sum * d(2f64.powi(n as i32))
}

/// Newton iterations on `exp(z) = y` from the f64 logarithm.
fn ln(y: D) -> D {
    let mut z = d(y.hi().ln());
    for _ in 0..2 {
        z = z + y * exp(-z) - d(1.0);
    }
    z
}

fn sigmoid(x: D) -> D {
    if x >= d(0.0) {
        div(d(1.0), d(1.0) + exp(-x))
    } else {
        let e = exp(x);
        div(e, d(1.0) + e)
    }
}

fn tanh(x: D) -> D {
    if x >= d(0.0) {
        let e = exp(d(-2.0) * x);
        div(d(1.0) - e, d(1.0) + e)
    } else {
        -tanh(-x)
    }
}

fn lse(xs: &[D]) -> D {
    let m = xs.iter().copied().fold(xs[0], |a, b| if b > a { b } else { a });
    let s = xs.iter().fold(d(0.0), |acc, &x| acc + exp(x - m));
    m + ln(s)
}

#[derive(Clone)]
struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<D>,
}

impl Mat {
    fn row(&self, r: usize) -> &[D] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    fn at(&self, r: usize, c: usize) -> D {
        self.data[r * self.cols + c]
    }
}

/// `x M (+ b)` for a row vector `x`.
fn affine(x: &[D], m: &Mat, b: Option<&Mat>) -> Vec<D> {
    assert_eq!(x.len(), m.rows);
    (0..m.cols)
        .map(|c| {
            let mut s = b.map_or(d(0.0), |b| b.data[c]);
            for (r, &xv) in x.iter().enumerate() {
                s += xv * m.at(r, c);
            }
            s
        })
        .collect()
}

fn add(a: &[D], b: &[D]) -> Vec<D> {
    a.iter().zip(b).map(|(&x, &y)| x + y).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Stage {
    Embed,
    Layer(usize),
    Head,
}

/// Intermediate values of one sentence.
pub struct Trace {
    emb: Vec<Vec<D>>,
    layers: Vec<Vec<Vec<D>>>,
}

pub struct DdTagger<'m> {
    model: &'m Tagger,
    params: Vec<Mat>,
}

impl<'m> DdTagger<'m> {
    pub fn new(model: &'m Tagger) -> Self {
        let params = model
            .params
            .iter()
            .map(|(_, _, t)| Mat {
                rows: t.rows(),
                cols: t.cols(),
                data: t.data().iter().map(|&x| d(x)).collect(),
            })
            .collect();
        DdTagger { model, params }
    }

    fn p(&self, name: &str) -> &Mat {
        let id = self.model.params.id(name).unwrap_or_else(|| panic!("no parameter {name}"));
        &self.params[id]
    }

    /// Runs one cell over `xs` (in the given order) from a zero state and
    /// returns the outputs indexed by position.
    fn run_cell(&self, kind: CellKind, prefix: &str, xs: &[Vec<D>], order: &[usize]) -> Vec<Vec<D>> {
        let g = |s: &str| self.p(&format!("{prefix}.{s}"));
        let h_dim = match kind {
            CellKind::Gru => g("U_h").rows,
            _ => g("U").rows,
        };
        let mut h = vec![d(0.0); h_dim];
        let mut c = vec![d(0.0); h_dim];
        let mut out = vec![Vec::new(); xs.len()];
        for &t in order {
            let x = &xs[t];
            match kind {
                CellKind::Simple => {
                    let z = add(&affine(x, g("W"), Some(g("b"))), &affine(&h, g("U"), None));
                    h = z.into_iter().map(tanh).collect();
                }
                CellKind::Lstm => {
                    let z = add(&affine(x, g("W"), Some(g("b"))), &affine(&h, g("U"), None));
                    for j in 0..h_dim {
                        let i = sigmoid(z[j]);
                        let f = sigmoid(z[h_dim + j]);
                        let o = sigmoid(z[2 * h_dim + j]);
                        let cand = tanh(z[3 * h_dim + j]);
                        c[j] = f * c[j] + i * cand;
                        h[j] = o * tanh(c[j]);
                    }
                }
                CellKind::Gru => {
                    let zr = add(&affine(x, g("W_zr"), Some(g("b_zr"))), &affine(&h, g("U_zr"), None));
                    let zr: Vec<D> = zr.into_iter().map(sigmoid).collect();
                    let rh: Vec<D> = (0..h_dim).map(|j| zr[h_dim + j] * h[j]).collect();
                    let cand = add(&affine(x, g("W_h"), Some(g("b_h"))), &affine(&rh, g("U_h"), None));
                    h = (0..h_dim).map(|j| h[j] + zr[j] * (tanh(cand[j]) - h[j])).collect();
                }
            }
            out[t] = h.clone();
        }
        out
    }

    fn bidirectional(&self, kind: CellKind, prefix: &str, xs: &[Vec<D>]) -> Vec<Vec<D>> {
        let fwd: Vec<usize> = (0..xs.len()).collect();
        let bwd: Vec<usize> = (0..xs.len()).rev().collect();
        let f = self.run_cell(kind, &format!("{prefix}.fwd"), xs, &fwd);
        let b = self.run_cell(kind, &format!("{prefix}.bwd"), xs, &bwd);
        f.into_iter().zip(b).map(|(mut f, b)| {
            f.extend(b);
            f
        }).collect()
    }

    fn embed(&self, enc: &Encoded) -> Vec<Vec<D>> {
        let table = self.p("embeddings.words");
        let mut rows: Vec<Vec<D>> = enc.words.iter().map(|&w| table.row(w).to_vec()).collect();
        if let Some(cc) = self.model.config.chars {
            let emb = self.p("chars.embeddings");
            for (row, chars) in rows.iter_mut().zip(&enc.chars) {
                if chars.is_empty() {
                    row.extend(vec![d(0.0); 2 * cc.hidden]);
                    continue;
                }
                let xs: Vec<Vec<D>> = chars.iter().map(|&c| emb.row(c).to_vec()).collect();
                let n = xs.len();
                let fwd: Vec<usize> = (0..n).collect();
                let bwd: Vec<usize> = (0..n).rev().collect();
                let f = self.run_cell(CellKind::Lstm, "chars.fwd", &xs, &fwd);
                let b = self.run_cell(CellKind::Lstm, "chars.bwd", &xs, &bwd);
                row.extend_from_slice(&f[n - 1]);
                row.extend_from_slice(&b[0]);
            }
        }
        rows
    }

    /// Embedding and shared-layer outputs up to `task`'s layer. Stages
    /// before `from` are copied from `base`.
    fn trace(&self, enc: &Encoded, task: usize, from: Stage, base: Option<&Trace>) -> Trace {
        let cfg = &self.model.config;
        let layer = cfg.tasks[task].layer;
        let emb = match (from, base) {
            (Stage::Embed, _) | (_, None) => self.embed(enc),
            (_, Some(b)) => b.emb.clone(),
        };
        let mut layers: Vec<Vec<Vec<D>>> = Vec::with_capacity(layer);
        for l in 0..layer {
            let cached = match (from, base) {
                (Stage::Layer(f), Some(b)) if l < f => Some(&b.layers[l]),
                (Stage::Head, Some(b)) => Some(&b.layers[l]),
                _ => None,
            };
            let out = match cached {
                Some(c) => c.clone(),
                None => {
                    let input: Vec<Vec<D>> = match layers.last() {
                        None => emb.clone(),
                        Some(prev) if cfg.shortcuts => prev
                            .iter()
                            .zip(&emb)
                            .map(|(a, e)| [a.as_slice(), e.as_slice()].concat())
                            .collect(),
                        Some(prev) => prev.clone(),
                    };
                    self.bidirectional(cfg.cell, &format!("shared.{l}"), &input)
                }
            };
            layers.push(out);
        }
        Trace { emb, layers }
    }

    fn head_loss(&self, x: &[Vec<D>], task: usize, gold: &[usize]) -> D {
        let spec = &self.model.config.tasks[task];
        let name = &spec.name;
        let logits: Vec<Vec<D>> = x
            .iter()
            .map(|row| {
                let mut v = row.clone();
                for (i, layer) in spec.private.iter().enumerate() {
                    v = affine(&v, self.p(&format!("task.{name}.private.{i}.W")), None)
                        .into_iter()
                        .map(|z| match layer.activation {
                            Activation::Sigmoid => sigmoid(z),
                            Activation::Tanh => tanh(z),
                            Activation::Relu => if z > d(0.0) { z } else { d(0.0) },
                            Activation::Identity => z,
                        })
                        .collect();
                }
                affine(&v, self.p(&format!("task.{name}.proj.W")), Some(self.p(&format!("task.{name}.proj.b"))))
            })
            .collect();
        match spec.head {
            HeadKind::Softmax => {
                let total = logits
                    .iter()
                    .zip(gold)
                    .fold(d(0.0), |acc, (z, &y)| acc + lse(z) - z[y]);
                div(total, d(logits.len() as f64))
            }
            HeadKind::Crf => {
                let trans = self.p(&format!("task.{name}.crf.transitions"));
                let begin = self.p(&format!("task.{name}.crf.begin"));
                let end = self.p(&format!("task.{name}.crf.end"));
                let n = begin.cols;
                let mut alpha: Vec<D> = (0..n).map(|j| begin.data[j] + logits[0][j]).collect();
                for z in &logits[1..] {
                    alpha = (0..n)
                        .map(|j| {
                            let terms: Vec<D> = (0..n).map(|i| alpha[i] + trans.at(i, j)).collect();
                            lse(&terms) + z[j]
                        })
                        .collect();
                }
                let fin: Vec<D> = (0..n).map(|j| alpha[j] + end.data[j]).collect();
                let log_z = lse(&fin);
                let mut score = begin.data[gold[0]] + end.data[gold[gold.len() - 1]];
                for (t, &y) in gold.iter().enumerate() {
                    score += logits[t][y];
                    if t > 0 {
                        score += trans.at(gold[t - 1], y);
                    }
                }
                log_z - score
            }
        }
    }

    fn batch_loss(&self, batch: &[(&Encoded, &[usize])], task: usize, from: Stage, base: Option<&[Trace]>) -> D {
        let mut total = d(0.0);
        for (i, (enc, gold)) in batch.iter().enumerate() {
            let t = self.trace(enc, task, from, base.map(|b| &b[i]));
            total += self.head_loss(t.layers.last().expect("at least one layer"), task, gold);
        }
        div(total, d(batch.len() as f64))
    }

    pub fn loss(&self, batch: &[(&Encoded, &[usize])], task: usize) -> D {
        self.batch_loss(batch, task, Stage::Embed, None)
    }

    fn stage(&self, id: usize) -> Stage {
        let name = self.model.params.name(id);
        if let Some(rest) = name.strip_prefix("shared.") {
            Stage::Layer(rest.split('.').next().and_then(|l| l.parse().ok()).expect("layer index"))
        } else if name.starts_with("task.") {
            Stage::Head
        } else {
            Stage::Embed
        }
    }

    /// Unperturbed traces of every sentence in `batch`.
    pub fn traces(&self, batch: &[(&Encoded, &[usize])], task: usize) -> Vec<Trace> {
        batch.iter().map(|(enc, _)| self.trace(enc, task, Stage::Embed, None)).collect()
    }

    /// `(f(θ+ε) − f(θ−ε)) / 2ε` for component `k` of parameter `id`.
    /// `base` must hold the unperturbed traces when given.
    pub fn central_difference(
        &mut self,
        batch: &[(&Encoded, &[usize])],
        task: usize,
        id: usize,
        k: usize,
        eps: f64,
        base: Option<&[Trace]>,
    ) -> f64 {
        let from = self.stage(id);
        let original = self.params[id].data[k];
        self.params[id].data[k] = original + d(eps);
        let plus = self.batch_loss(batch, task, from, base);
        self.params[id].data[k] = original - d(eps);
        let minus = self.batch_loss(batch, task, from, base);
        self.params[id].data[k] = original;
        div(plus - minus, d(2.0 * eps)).hi()
    }
}

/// Largest `|a − n| / max(|a|, |n|, 1e-8)` over every component of every
/// trainable parameter, with analytic gradients from the library and
/// numeric ones from the double-double oracle.
pub fn max_relative_error(model: &Tagger, batch: &[(&Encoded, &[usize])], task: usize, eps: f64) -> f64 {
    let (_, grads) = model.loss_and_gradients(batch, task, None).expect("forward pass");
    let mut oracle = DdTagger::new(model);
    let base = oracle.traces(batch, task);
    let mut worst: f64 = 0.0;
    for (id, _, t) in model.params.iter() {
        if !model.params.is_trainable(id) {
            continue;
        }
        let analytic = grads.iter().find(|(g, _)| *g == id).map(|(_, g)| g.data().to_vec());
        for k in 0..t.len() {
            let a = analytic.as_ref().map_or(0.0, |g| g[k]);
            let n = oracle.central_difference(batch, task, id, k, eps, Some(&base));
            let err = (a - n).abs() / a.abs().max(n.abs()).max(1e-8);
            worst = worst.max(err);
        }
    }
    worst
}
