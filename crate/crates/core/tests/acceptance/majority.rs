use mtl_tagger::metrics::token_prf;

use crate::{ensure, Verdict};

const TOKENS: usize = 7437;
const MAJORITY: usize = 2636;
const PUBLISHED: f64 = 3.079;

pub fn run() -> Verdict {
    let classes = ["EG", "EC", "CH", "CL", "IO", "MI", "ST", "XX"];
    let mut inventory = vec!["O".to_owned()];
    for c in classes {
        inventory.push(format!("B-{c}"));
        inventory.push(format!("I-{c}"));
    }
    ensure(inventory.len() == 17, || format!("{} labels", inventory.len()))?;

    // The non-majority tokens are spread over the remaining labels; only
    // their total matters for the constant prediction.
    let others: Vec<&String> = inventory.iter().filter(|l| *l != "I-EG").collect();
    let mut gold: Vec<&str> = vec!["I-EG"; MAJORITY];
    gold.extend((0..TOKENS - MAJORITY).map(|i| others[i % others.len()].as_str()));
    let pred = vec!["I-EG"; TOKENS];
    let scores = token_prf(&gold, &pred, &inventory).map_err(|e| e.to_string())?;

    let p = MAJORITY as f64 / TOKENS as f64;
    let by_hand = 100.0 * (2.0 * p / (p + 1.0)) / 17.0;
    let got = 100.0 * scores.f1;
    ensure((got - by_hand).abs() < 1e-12, || format!("macro F1 {got} vs {by_hand}"))?;
    ensure((got - PUBLISHED).abs() <= 0.001, || format!("macro F1 {got:.4}% vs published {PUBLISHED}%"))?;
    Ok(format!("macro F1 {got:.4}%"))
}
