use mtl_tagger::corpus::{kurtosis, LabelDistribution};
use mtl_tagger::metrics::{coefficient_of_variation, overlap_length, span_overlap_profile, LabeledSpan};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{ensure, Verdict};

const SAMPLES: usize = 100_000;

/// Standard normal pairs from two uniforms.
fn box_muller(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let u1: f64 = 1.0 - rng.gen::<f64>();
        let u2: f64 = rng.gen();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        out.push(r * theta.cos());
        out.push(r * theta.sin());
    }
    out.truncate(n);
    out
}

pub fn run() -> Verdict {
    let h = LabelDistribution::from_labels(["A", "B", "C", "D", "D", "C", "B", "A"]).entropy().map_err(|e| e.to_string())?;
    ensure(h == 2.0, || format!("uniform-4 entropy {h}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let k = kurtosis(&box_muller(&mut rng, SAMPLES)).map_err(|e| e.to_string())?;
    ensure((k - 3.0).abs() <= 0.1, || format!("normal kurtosis {k}"))?;

    let cv = coefficient_of_variation(&[1.0, 2.0, 3.0]).map_err(|e| e.to_string())?;
    ensure((cv - 0.4082).abs() <= 1e-4, || format!("cv {cv}"))?;
    ensure((cv - (2.0f64 / 3.0).sqrt() / 2.0).abs() <= 1e-15, || format!("cv {cv} vs population formula"))?;

    // One instance per overlap condition on half-open spans [a, b) and
    // [c, d); lengths counted by hand.
    let cases = [
        ("cond1", (2, 5, 2, 5), 3),
        ("cond2", (4, 8, 2, 6), 2),
        ("cond3", (2, 5, 4, 8), 1),
        ("cond4", (3, 5, 1, 8), 2),
        ("cond5", (1, 8, 3, 5), 2),
        ("disjoint", (0, 2, 5, 7), 0),
    ];
    for (name, (a, b, c, d), want) in cases {
        let got = overlap_length(a, b, c, d);
        let shared = (a..b).filter(|i| (c..d).contains(i)).count();
        ensure(got == want && shared == want, || format!("{name}: length {got}, shared positions {shared}, expected {want}"))?;
    }
    let g = [LabeledSpan::new(2, 5, "P")];
    let profile = |p: &[LabeledSpan]| span_overlap_profile(&g, p).map_err(|e| e.to_string());
    ensure(profile(&[LabeledSpan::new(2, 5, "P")])? == [(3, 3)], || "identical span".into())?;
    ensure(profile(&[LabeledSpan::new(4, 8, "P")])? == [(3, 1)], || "right overlap".into())?;
    ensure(profile(&[LabeledSpan::new(2, 5, "C")])? == [(3, 0)], || "label mismatch".into())?;
    ensure(span_overlap_profile(&[LabeledSpan::new(3, 3, "P")], &[]).is_err(), || "empty span accepted".into())?;

    Ok(format!("entropy {h}, normal kurtosis {k:.4}, cv {cv:.6}, five overlap conditions"))
}
