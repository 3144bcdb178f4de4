use mtl_tagger::numeric::{CrfScores, Tensor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{ensure, Verdict};

const DRAWS: usize = 200;

struct Instance {
    emissions: Tensor,
    transitions: Tensor,
    begin: Tensor,
    end: Tensor,
}

impl Instance {
    /// Odd draws use scores in {-1, 0, 1} so that optimal paths tie often.
    fn random(t: usize, l: usize, ties: bool, rng: &mut ChaCha8Rng) -> Self {
        let mut table = |r: usize, c: usize| {
            let v = (0..r * c)
                .map(|_| if ties { rng.gen_range(-1..=1) as f64 } else { rng.gen_range(-3.0..3.0) })
                .collect();
            Tensor::from_vec(r, c, v).unwrap()
        };
        Instance {
            emissions: table(t, l),
            transitions: table(l, l),
            begin: table(1, l),
            end: table(1, l),
        }
    }

    fn scores(&self) -> CrfScores<'_> {
        CrfScores {
            emissions: &self.emissions,
            transitions: &self.transitions,
            begin: &self.begin,
            end: &self.end,
        }
    }

    fn score(&self, path: &[usize]) -> f64 {
        let mut s = self.begin.get(0, path[0]) + self.end.get(0, *path.last().unwrap());
        for (t, &y) in path.iter().enumerate() {
            s += self.emissions.get(t, y);
            if t > 0 {
                s += self.transitions.get(path[t - 1], y);
            }
        }
        s
    }
}

/// All `l^t` label paths.
fn paths(t: usize, l: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..t {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..l).map(move |y| {
                    let mut q = p.clone();
                    q.push(y);
                    q
                })
            })
            .collect();
    }
    out
}

/// Backtracking with the lowest label at each step picks, among optimal
/// paths, the one smallest when compared from the last position backwards.
fn reverse_lex_less(a: &[usize], b: &[usize]) -> bool {
    a.iter().rev().lt(b.iter().rev())
}

pub fn run() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut worst_z, mut worst_sum, mut tied) = (0.0f64, 0.0f64, 0);
    for draw in 0..DRAWS {
        let t = rng.gen_range(1..=5);
        let l = rng.gen_range(1..=4);
        let inst = Instance::random(t, l, draw % 2 == 1, &mut rng);
        let crf = inst.scores();
        let all = paths(t, l);
        let scores: Vec<f64> = all.iter().map(|p| inst.score(p)).collect();

        let m = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let brute_z = m + scores.iter().map(|s| (s - m).exp()).sum::<f64>().ln();
        let z = crf.log_partition();
        worst_z = worst_z.max((z - brute_z).abs());
        ensure((z - brute_z).abs() <= 1e-10, || format!("draw {draw}: log Z {z} vs {brute_z}"))?;

        let mut best = 0;
        for k in 1..all.len() {
            if scores[k] > scores[best] || (scores[k] == scores[best] && reverse_lex_less(&all[k], &all[best])) {
                best = k;
            }
        }
        if scores.iter().filter(|&&s| s == scores[best]).count() > 1 {
            tied += 1;
        }
        let (path, score) = crf.viterbi();
        ensure(path == all[best], || format!("draw {draw}: viterbi {path:?}, brute force {:?}", all[best]))?;
        ensure((score - scores[best]).abs() <= 1e-12, || format!("draw {draw}: viterbi score {score}"))?;

        let mut total = 0.0;
        for (p, s) in all.iter().zip(&scores) {
            let lib = crf.path_score(p);
            ensure((lib - s).abs() <= 1e-12, || format!("draw {draw}: path score of {p:?}"))?;
            total += (lib - z).exp();
        }
        worst_sum = worst_sum.max((total - 1.0).abs());
        ensure((total - 1.0).abs() <= 1e-10, || format!("draw {draw}: probabilities sum to {total}"))?;
    }
    Ok(format!(
        "{DRAWS} draws ({tied} with tied optima), max |log Z err| {worst_z:.1e}, max |Σp − 1| {worst_sum:.1e}"
    ))
}
