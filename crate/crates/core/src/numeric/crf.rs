//! First-order linear-chain CRF kernels over plain tensors.
//!
//! Scores are laid out as `emissions: T × L`, `transitions: L × L` (row is
//! the previous label), and `begin`/`end`: `1 × L`. A path `y` scores
//! `begin[y₀] + Σₜ emissions[t, yₜ] + Σₜ transitions[yₜ₋₁, yₜ] + end[y_T]`.

use super::tensor::{log_sum_exp, Tensor};

/// Borrowed view of the four CRF score tables.
#[derive(Clone, Copy, Debug)]
pub struct CrfScores<'a> {
    pub emissions: &'a Tensor,
    pub transitions: &'a Tensor,
    pub begin: &'a Tensor,
    pub end: &'a Tensor,
}

impl<'a> CrfScores<'a> {
    pub fn num_labels(&self) -> usize {
        self.emissions.cols()
    }

    pub fn len(&self) -> usize {
        self.emissions.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.emissions.rows() == 0
    }

    pub fn shapes_agree(&self) -> bool {
        let l = self.num_labels();
        self.transitions.shape() == [l, l]
            && self.begin.shape() == [1, l]
            && self.end.shape() == [1, l]
    }

    pub fn path_score(&self, path: &[usize]) -> f64 {
        debug_assert_eq!(path.len(), self.len());
        let Some((&first, _)) = path.split_first() else {
            return 0.0;
        };
        let mut score = self.begin.get(0, first) + self.emissions.get(0, first);
        for t in 1..path.len() {
            score += self.transitions.get(path[t - 1], path[t]) + self.emissions.get(t, path[t]);
        }
        score + self.end.get(0, path[path.len() - 1])
    }

    /// Forward log-potentials `alpha[t][j]` (log-sum over prefixes ending in `j`).
    fn forward_table(&self) -> Vec<Vec<f64>> {
        let (t_len, l) = (self.len(), self.num_labels());
        let mut alpha = Vec::with_capacity(t_len);
        alpha.push(
            (0..l)
                .map(|j| self.begin.get(0, j) + self.emissions.get(0, j))
                .collect::<Vec<_>>(),
        );
        let mut scratch = vec![0.0; l];
        for t in 1..t_len {
            let prev: &Vec<f64> = &alpha[t - 1];
            let row = (0..l)
                .map(|j| {
                    for i in 0..l {
                        scratch[i] = prev[i] + self.transitions.get(i, j);
                    }
                    self.emissions.get(t, j) + log_sum_exp(&scratch)
                })
                .collect();
            alpha.push(row);
        }
        alpha
    }

    fn backward_table(&self) -> Vec<Vec<f64>> {
        let (t_len, l) = (self.len(), self.num_labels());
        let mut beta = vec![vec![0.0; l]; t_len];
        beta[t_len - 1] = self.end.row_slice(0).to_vec();
        let mut scratch = vec![0.0; l];
        for t in (0..t_len - 1).rev() {
            for i in 0..l {
                for j in 0..l {
                    scratch[j] =
                        self.transitions.get(i, j) + self.emissions.get(t + 1, j) + beta[t + 1][j];
                }
                beta[t][i] = log_sum_exp(&scratch);
            }
        }
        beta
    }

    /// `log Z`: log-sum of `exp(path_score)` over all `L^T` paths.
    pub fn log_partition(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        let alpha = self.forward_table();
        let last = &alpha[self.len() - 1];
        let finals: Vec<f64> = (0..self.num_labels())
            .map(|j| last[j] + self.end.get(0, j))
            .collect();
        log_sum_exp(&finals)
    }

    /// Posterior marginals: per-position label marginals (`T × L`) and
    /// transition marginals summed over positions (`L × L`).
    pub fn marginals(&self) -> (Tensor, Tensor, f64) {
        let (t_len, l) = (self.len(), self.num_labels());
        let alpha = self.forward_table();
        let beta = self.backward_table();
        let log_z = {
            let finals: Vec<f64> = (0..l).map(|j| alpha[t_len - 1][j] + self.end.get(0, j)).collect();
            log_sum_exp(&finals)
        };
        let mut node = Tensor::zeros(t_len, l);
        for t in 0..t_len {
            for i in 0..l {
                node.set(t, i, (alpha[t][i] + beta[t][i] - log_z).exp());
            }
        }
        let mut pair = Tensor::zeros(l, l);
        for t in 0..t_len.saturating_sub(1) {
            for i in 0..l {
                for j in 0..l {
                    let lp = alpha[t][i]
                        + self.transitions.get(i, j)
                        + self.emissions.get(t + 1, j)
                        + beta[t + 1][j]
                        - log_z;
                    let cur = pair.get(i, j);
                    pair.set(i, j, cur + lp.exp());
                }
            }
        }
        (node, pair, log_z)
    }

    /// Highest-scoring path and its score. Every backtrack step resolves ties
    /// toward the lowest label index.
    pub fn viterbi(&self) -> (Vec<usize>, f64) {
        let (t_len, l) = (self.len(), self.num_labels());
        if t_len == 0 {
            return (Vec::new(), 0.0);
        }
        let mut delta: Vec<f64> = (0..l)
            .map(|j| self.begin.get(0, j) + self.emissions.get(0, j))
            .collect();
        let mut back = vec![vec![0usize; l]; t_len];
        for t in 1..t_len {
            let mut next = vec![0.0; l];
            for j in 0..l {
                let mut best_i = 0;
                let mut best = delta[0] + self.transitions.get(0, j);
                for i in 1..l {
                    let s = delta[i] + self.transitions.get(i, j);
                    if s > best {
                        best = s;
                        best_i = i;
                    }
                }
                back[t][j] = best_i;
                next[j] = best + self.emissions.get(t, j);
            }
            delta = next;
        }
        let mut last = 0;
        let mut best = delta[0] + self.end.get(0, 0);
        for j in 1..l {
            let s = delta[j] + self.end.get(0, j);
            if s > best {
                best = s;
                last = j;
            }
        }
        let mut path = vec![0; t_len];
        path[t_len - 1] = last;
        for t in (1..t_len).rev() {
            path[t - 1] = back[t][path[t]];
        }
        (path, best)
    }
}
