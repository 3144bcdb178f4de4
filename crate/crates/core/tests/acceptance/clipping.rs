use mtl_tagger::numeric::Tensor;
use mtl_tagger::training::{clip_global_norm, GradientSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{ensure, Verdict};

const SETS: usize = 10_000;

fn flat(g: &GradientSet) -> Vec<f64> {
    g.grads.iter().flat_map(|(_, t)| t.data().iter().copied()).collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn run() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut clipped, mut worst_cos) = (0, 0.0f64);
    for case in 0..SETS {
        let tensors = rng.gen_range(1..=5);
        let scale = 10f64.powf(rng.gen_range(-3.0..3.0));
        let grads = (0..tensors)
            .map(|id| {
                let (r, c) = (rng.gen_range(1..=4), rng.gen_range(1..=4));
                (id, Tensor::uniform(r, c, scale, &mut rng))
            })
            .collect();
        let original = GradientSet::new(grads);
        let threshold = 10f64.powf(rng.gen_range(-3.0..3.0));
        let before = flat(&original);
        let pre = norm(&before);

        let mut g = original.clone();
        let reported = clip_global_norm(&mut g, threshold);
        let after = flat(&g);
        let post = norm(&after);
        ensure((reported - pre).abs() <= 1e-12 * pre.max(1.0), || format!("case {case}: reported norm {reported} vs {pre}"))?;
        ensure(post <= threshold + 1e-12, || format!("case {case}: norm {post} above {threshold}"))?;
        if pre <= threshold {
            ensure(g == original, || format!("case {case}: changed below threshold"))?;
        } else {
            clipped += 1;
        }
        if pre > 0.0 {
            let dot: f64 = before.iter().zip(&after).map(|(a, b)| a * b).sum();
            let cos = dot / (pre * post);
            worst_cos = worst_cos.max((cos - 1.0).abs());
            ensure((cos - 1.0).abs() <= 1e-12, || format!("case {case}: cosine {cos}"))?;
        }
    }
    Ok(format!("{SETS} sets ({clipped} clipped), max |cos − 1| {worst_cos:.1e}"))
}
