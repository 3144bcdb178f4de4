//! Dense tensors, a reverse-mode differentiation tape and gradient checking.

mod crf;
mod gradcheck;
mod graph;
mod tensor;

use thiserror::Error;

pub use crf::CrfScores;
pub use gradcheck::check_gradients;
pub use graph::{Graph, ParamId, Var};
pub use tensor::{log_sum_exp, sigmoid, Tensor};

#[derive(Debug, Error)]
pub enum NumericError {
    #[error("shape mismatch in {op}: {left:?} vs {right:?}")]
    Shape {
        op: &'static str,
        left: [usize; 2],
        right: [usize; 2],
    },
    #[error("tensor of shape {shape:?} cannot hold {len} values")]
    DataLength { shape: [usize; 2], len: usize },
    #[error("index {index} out of range in {op} (extent {extent})")]
    Index {
        op: &'static str,
        index: usize,
        extent: usize,
    },
    #[error("non-finite value produced by {op}")]
    NonFinite { op: &'static str },
    #[error("non-finite adjoint at node {0}")]
    NonFiniteAdjoint(usize),
    #[error("loss must be a scalar, got shape {0:?}")]
    NonScalarLoss([usize; 2]),
    #[error("backward pass already ran on this graph")]
    BackwardTwice,
    #[error("node {0} is not a leaf")]
    NotALeaf(usize),
}
