use crate::numeric::Tensor;

/// Gradients of one update, keyed by parameter id.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GradientSet {
    pub grads: Vec<(usize, Tensor)>,
}

impl GradientSet {
    pub fn new(grads: Vec<(usize, Tensor)>) -> Self {
        GradientSet { grads }
    }

    /// `sqrt(Σ ‖g‖²)` over all tensors.
    pub fn global_norm(&self) -> f64 {
        self.grads
            .iter()
            .map(|(_, g)| g.squared_norm())
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&mut self, factor: f64) {
        for (_, g) in &mut self.grads {
            g.scale_in_place(factor);
        }
    }

    pub fn get(&self, id: usize) -> Option<&Tensor> {
        self.grads.iter().find(|(i, _)| *i == id).map(|(_, g)| g)
    }

    pub fn is_finite(&self) -> bool {
        self.grads.iter().all(|(_, g)| g.is_finite())
    }
}

/// Rescales by `threshold / max(threshold, ‖ĝ‖)`. Returns the norm before
/// clipping. Sets whose norm does not exceed the threshold are untouched.
pub fn clip_global_norm(grads: &mut GradientSet, threshold: f64) -> f64 {
    assert!(threshold > 0.0, "clip threshold must be positive");
    let norm = grads.global_norm();
    if norm > threshold {
        grads.scale(threshold / norm);
    }
    norm
}
