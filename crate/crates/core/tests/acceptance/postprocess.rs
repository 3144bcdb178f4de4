use mtl_tagger::labels::{am_postprocess, correct_bio, validate_bio, AmLabel, AmType, BioLabel, Prefix, Repair, Stance};
use mtl_tagger::metrics::DocumentStructure;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{ensure, Verdict};

const SEQUENCES: usize = 10_000;

/// Unconstrained tuples: any flag, type, distance and stance, bottoms included.
fn raw_am(rng: &mut ChaCha8Rng) -> AmLabel {
    let b = *[Prefix::B, Prefix::I, Prefix::I, Prefix::O].choose(rng).unwrap();
    let t = [None, Some(AmType::Premise), Some(AmType::Claim), Some(AmType::MajorClaim)]
        .choose(rng)
        .copied()
        .unwrap();
    let d = rng.gen_bool(0.8).then(|| rng.gen_range(-5..=5));
    let s = [None, Some(Stance::Supp), Some(Stance::Att), Some(Stance::For), Some(Stance::Ag)]
        .choose(rng)
        .copied()
        .unwrap();
    AmLabel { b, t, d, s }
}

/// Runs of a repeated label make well-formed spans likely as well.
fn raw_sequence<T: Clone>(rng: &mut ChaCha8Rng, mut draw: impl FnMut(&mut ChaCha8Rng) -> T) -> Vec<T> {
    let len = rng.gen_range(0..=30);
    let mut out = Vec::with_capacity(len);
    while out.len() < len {
        let l = draw(rng);
        for _ in 0..rng.gen_range(1..=4).min(len - out.len()) {
            out.push(l.clone());
        }
    }
    out
}

fn raw_bio(rng: &mut ChaCha8Rng) -> BioLabel {
    match rng.gen_range(0..5) {
        0 => BioLabel::outside(),
        1 => BioLabel::begin("X"),
        2 => BioLabel::begin("Y"),
        3 => BioLabel::inside("X"),
        _ => BioLabel::inside("Y"),
    }
}

pub fn run() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut repaired_am, mut repaired_bio) = (0, 0);
    for case in 0..SEQUENCES {
        let raw = raw_sequence(&mut rng, raw_am);
        let out = am_postprocess(&raw);
        ensure(out.len() == raw.len(), || format!("case {case}: length changed"))?;
        for (i, l) in out.iter().enumerate() {
            ensure(l.is_valid(), || format!("case {case}: token {i} label {l} invalid: {:?}", l.check()))?;
        }
        DocumentStructure::from_labels(&out).map_err(|e| format!("case {case}: {e}"))?;
        ensure(am_postprocess(&out) == out, || format!("case {case}: not idempotent"))?;
        if out != raw {
            repaired_am += 1;
        }

        let raw = raw_sequence(&mut rng, raw_bio);
        for repair in [Repair::ToBegin, Repair::ToOutside] {
            let out = correct_bio(&raw, repair);
            ensure(out.len() == raw.len(), || format!("case {case}: BIO length changed"))?;
            ensure(validate_bio(&out).is_empty(), || format!("case {case}: {repair:?} output still invalid"))?;
            ensure(correct_bio(&out, repair) == out, || format!("case {case}: {repair:?} not idempotent"))?;
            if out != raw {
                repaired_bio += 1;
            }
        }
    }
    Ok(format!("{SEQUENCES} AM sequences ({repaired_am} repaired), {} BIO repairs ({repaired_bio} changed)", 2 * SEQUENCES))
}
