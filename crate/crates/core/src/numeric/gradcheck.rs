use super::graph::{Graph, Var};
use super::NumericError;

/// Compares reverse-mode adjoints with central differences
/// `(f(θ+ε) − f(θ−ε)) / 2ε` for every component of every leaf in `leaves`.
///
/// Returns the largest `|a − n| / max(|a|, |n|, 1e-8)`. The graph is left
/// with its original leaf values and a completed backward pass.
pub fn check_gradients(
    graph: &mut Graph,
    loss: Var,
    leaves: &[Var],
    eps: f64,
) -> Result<f64, NumericError> {
    graph.forward()?;
    graph.backward(loss)?;
    let analytic: Vec<_> = leaves
        .iter()
        .map(|&v| {
            graph
                .grad(v)
                .cloned()
                .unwrap_or_else(|| graph.value(v).map(|_| 0.0))
        })
        .collect();

    let mut worst: f64 = 0.0;
    for (&leaf, adjoint) in leaves.iter().zip(&analytic) {
        let original = graph.value(leaf).clone();
        for k in 0..original.len() {
            let mut eval = |delta: f64| -> Result<f64, NumericError> {
                let mut t = original.clone();
                t.data_mut()[k] += delta;
                graph.set_leaf(leaf, t)?;
                graph.forward()?;
                Ok(graph.value(loss).item())
            };
            let numeric = (eval(eps)? - eval(-eps)?) / (2.0 * eps);
            let a = adjoint.data()[k];
            let err = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-8);
            worst = worst.max(err);
        }
        graph.set_leaf(leaf, original)?;
    }
    graph.forward()?;
    graph.backward(loss)?;
    Ok(worst)
}
