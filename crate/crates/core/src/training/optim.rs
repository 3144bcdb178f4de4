use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::GradientSet;
use crate::network::ParamStore;
use crate::numeric::Tensor;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum OptimizerConfig {
    Sgd {
        lr: f64,
    },
    Adam {
        #[serde(default = "adam_lr")]
        lr: f64,
        #[serde(default = "beta1")]
        beta1: f64,
        #[serde(default = "beta2")]
        beta2: f64,
        #[serde(default = "adam_eps")]
        eps: f64,
    },
}

fn adam_lr() -> f64 {
    1e-3
}
fn beta1() -> f64 {
    0.9
}
fn beta2() -> f64 {
    0.999
}
fn adam_eps() -> f64 {
    1e-8
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig::Adam {
            lr: adam_lr(),
            beta1: beta1(),
            beta2: beta2(),
            eps: adam_eps(),
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<(), String> {
        match *self {
            OptimizerConfig::Sgd { lr } if lr > 0.0 => Ok(()),
            OptimizerConfig::Adam { lr, beta1, beta2, eps }
                if lr > 0.0 && (0.0..1.0).contains(&beta1) && (0.0..1.0).contains(&beta2) && eps > 0.0 =>
            {
                Ok(())
            }
            _ => Err(format!("invalid optimizer settings {self:?}")),
        }
    }
}

#[derive(Clone, Debug)]
struct Moments {
    m: Tensor,
    v: Tensor,
    step: i32,
}

/// Optimizer with its per-parameter state. Parameters without a gradient in
/// an update are left untouched, including their Adam step count.
#[derive(Clone, Debug)]
pub struct Optimizer {
    config: OptimizerConfig,
    state: HashMap<usize, Moments>,
}

impl Optimizer {
    pub fn new(config: OptimizerConfig) -> Self {
        Optimizer {
            config,
            state: HashMap::new(),
        }
    }

    pub fn step(&mut self, params: &mut ParamStore, grads: &GradientSet) {
        for (id, g) in &grads.grads {
            let theta = params.get_mut(*id);
            match self.config {
                OptimizerConfig::Sgd { lr } => {
                    for (t, &gv) in theta.data_mut().iter_mut().zip(g.data()) {
                        *t -= lr * gv;
                    }
                }
                OptimizerConfig::Adam { lr, beta1, beta2, eps } => {
                    let s = self.state.entry(*id).or_insert_with(|| Moments {
                        m: Tensor::zeros(g.rows(), g.cols()),
                        v: Tensor::zeros(g.rows(), g.cols()),
                        step: 0,
                    });
                    s.step += 1;
                    let c1 = 1.0 - beta1.powi(s.step);
                    let c2 = 1.0 - beta2.powi(s.step);
                    let (m, v) = (s.m.data_mut(), s.v.data_mut());
                    for (k, t) in theta.data_mut().iter_mut().enumerate() {
                        let gv = g.data()[k];
                        m[k] = beta1 * m[k] + (1.0 - beta1) * gv;
                        v[k] = beta2 * v[k] + (1.0 - beta2) * gv * gv;
                        *t -= lr * (m[k] / c1) / ((v[k] / c2).sqrt() + eps);
                    }
                }
            }
        }
    }
}
