//! Acceptance criteria, one line of output per criterion. Exits non-zero
//! when any criterion fails.

#[path = "../common/mod.rs"]
mod common;

mod am;
mod clipping;
mod crf;
mod early;
mod gradients;
mod hyperopt;
mod majority;
mod postprocess;
mod stats;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

/// `Ok` carries a short summary of what was measured.
pub type Verdict = Result<String, String>;

/// Fails with `msg` unless `cond` holds.
pub fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 11] = [
        ("gradient correctness", gradients::run),
        ("crf exactness", crf::run),
        ("am metric oracle", am::run),
        ("majority baseline", majority::run),
        ("norm clipping", clipping::run),
        ("post-processing totality", postprocess::run),
        ("overfit capability", overfit::run),
        ("early stopping and determinism", early::run),
        ("s2s metrics", s2s::run),
        ("hyperopt protocol", hyperopt::run),
        ("statistics", stats::run),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let verdict = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match verdict {
            Ok(detail) => println!("PASS {:>2} {name} ({secs:.1}s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({secs:.1}s): {detail}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
