use rand::Rng;

use super::CellKind;
use crate::numeric::{Graph, NumericError, Tensor, Var};

/// Graph handles of one recurrent cell's parameters.
///
/// Simple and LSTM cells hold `[W, U, b]` (LSTM gates fused in the order
/// input, forget, output, candidate). GRU cells hold
/// `[W_zr, U_zr, b_zr, W_h, U_h, b_h]`.
#[derive(Clone, Debug)]
pub struct CellVars {
    pub kind: CellKind,
    pub hidden: usize,
    pub vars: Vec<Var>,
}

#[derive(Clone, Copy, Debug)]
pub struct CellState {
    pub h: Var,
    /// LSTM memory cell.
    pub c: Option<Var>,
}

impl CellState {
    pub fn zeros(g: &mut Graph, kind: CellKind, hidden: usize) -> Self {
        let h = g.input(Tensor::zeros(1, hidden));
        let c = (kind == CellKind::Lstm).then(|| g.input(Tensor::zeros(1, hidden)));
        CellState { h, c }
    }
}

pub(crate) fn glorot<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Tensor {
    Tensor::uniform(rows, cols, (6.0 / (rows + cols) as f64).sqrt(), rng)
}

/// Freshly initialised parameter tensors `(suffix, tensor)` for a cell with
/// input width `k`, drawn in the listed order.
pub fn init_cell<R: Rng + ?Sized>(kind: CellKind, k: usize, h: usize, rng: &mut R) -> Vec<(&'static str, Tensor)> {
    match kind {
        CellKind::Simple => vec![("W", glorot(k, h, rng)), ("U", glorot(h, h, rng)), ("b", Tensor::zeros(1, h))],
        CellKind::Lstm => {
            let mut b = Tensor::zeros(1, 4 * h);
            for j in h..2 * h {
                b.set(0, j, 1.0);
            }
            vec![("W", glorot(k, 4 * h, rng)), ("U", glorot(h, 4 * h, rng)), ("b", b)]
        }
        CellKind::Gru => vec![
            ("W_zr", glorot(k, 2 * h, rng)),
            ("U_zr", glorot(h, 2 * h, rng)),
            ("b_zr", Tensor::zeros(1, 2 * h)),
            ("W_h", glorot(k, h, rng)),
            ("U_h", glorot(h, h, rng)),
            ("b_h", Tensor::zeros(1, h)),
        ],
    }
}

/// Input projections `x W + b` for every row of `x`.
pub fn project_inputs(g: &mut Graph, cell: &CellVars, x: Var) -> Result<Vec<Var>, NumericError> {
    let v = &cell.vars;
    let mut out = Vec::new();
    let pairs: &[(usize, usize)] = match cell.kind {
        CellKind::Simple | CellKind::Lstm => &[(0, 2)],
        CellKind::Gru => &[(0, 2), (3, 5)],
    };
    for &(w, b) in pairs {
        let xw = g.matmul(x, v[w])?;
        out.push(g.add_row(xw, v[b])?);
    }
    Ok(out)
}

/// One step given the projected inputs of this time step. `h_in` is the
/// previous output as seen by the recurrent weights (it differs from
/// `state.h` only under state dropout).
pub fn step_projected(
    g: &mut Graph,
    cell: &CellVars,
    xp: &[Var],
    h_in: Var,
    state: CellState,
) -> Result<CellState, NumericError> {
    let v = &cell.vars;
    let h = cell.hidden;
    match cell.kind {
        CellKind::Simple => {
            let hu = g.matmul(h_in, v[1])?;
            let z = g.add(xp[0], hu)?;
            Ok(CellState {
                h: g.tanh(z)?,
                c: None,
            })
        }
        CellKind::Lstm => {
            let hu = g.matmul(h_in, v[1])?;
            let z = g.add(xp[0], hu)?;
            let i = g.slice_cols(z, 0, h)?;
            let i = g.sigmoid(i)?;
            let f = g.slice_cols(z, h, h)?;
            let f = g.sigmoid(f)?;
            let o = g.slice_cols(z, 2 * h, h)?;
            let o = g.sigmoid(o)?;
            let cand = g.slice_cols(z, 3 * h, h)?;
            let cand = g.tanh(cand)?;
            let c_prev = state.c.expect("LSTM state carries a memory cell");
            let keep = g.mul(f, c_prev)?;
            let write = g.mul(i, cand)?;
            let c = g.add(keep, write)?;
            let tc = g.tanh(c)?;
            Ok(CellState {
                h: g.mul(o, tc)?,
                c: Some(c),
            })
        }
        CellKind::Gru => {
            let hu = g.matmul(h_in, v[1])?;
            let zr = g.add(xp[0], hu)?;
            let zr = g.sigmoid(zr)?;
            let z = g.slice_cols(zr, 0, h)?;
            let r = g.slice_cols(zr, h, h)?;
            let rh = g.mul(r, h_in)?;
            let rhu = g.matmul(rh, v[4])?;
            let cand = g.add(xp[1], rhu)?;
            let cand = g.tanh(cand)?;
            // (1 − z) ⊙ h + z ⊙ ĥ  =  h + z ⊙ (ĥ − h)
            let delta = g.sub(cand, state.h)?;
            let zd = g.mul(z, delta)?;
            Ok(CellState {
                h: g.add(state.h, zd)?,
                c: None,
            })
        }
    }
}

/// One step from a raw input row `x_t` (1 × k).
pub fn cell_step(g: &mut Graph, cell: &CellVars, x_t: Var, state: CellState) -> Result<CellState, NumericError> {
    let xp = project_inputs(g, cell, x_t)?;
    step_projected(g, cell, &xp, state.h, state)
}
