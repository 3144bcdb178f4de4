use mtl_tagger::labels::AmAliases;
use mtl_tagger::metrics::{am_f1, AmTarget, MatchLevel, ResultList, ResultSentence};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{ensure, Verdict};

const DOCUMENTS: usize = 500;
const MAX_COMPONENTS: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Major,
    Claim,
    Premise,
}

/// A component over the inclusive token range `first..=last`.
#[derive(Clone, Debug)]
struct Comp {
    first: usize,
    last: usize,
    kind: Kind,
    /// For a premise `true` is Supp, for a claim `true` is For.
    positive: bool,
    /// Absolute index of the linked component.
    target: Option<usize>,
    /// Index of the gold component this prediction was derived from.
    origin: Option<usize>,
}

#[derive(Clone, Debug)]
struct Doc {
    len: usize,
    comps: Vec<Comp>,
}

impl Doc {
    fn labels(&self) -> Vec<String> {
        let mut out = vec!["O".to_owned(); self.len];
        for (k, c) in self.comps.iter().enumerate() {
            for (i, slot) in out[c.first..=c.last].iter_mut().enumerate() {
                let b = if i == 0 { "B" } else { "I" };
                *slot = match c.kind {
                    Kind::Major => format!("{b}:MC:⊥:⊥"),
                    Kind::Claim => format!("{b}:C:⊥:{}", if c.positive { "For" } else { "Ag" }),
                    Kind::Premise => {
                        let d = c.target.unwrap() as i64 - k as i64;
                        format!("{b}:P:{d}:{}", if c.positive { "Supp" } else { "Att" })
                    }
                };
            }
        }
        out
    }
}

fn random_kind(rng: &mut ChaCha8Rng) -> Kind {
    *[Kind::Major, Kind::Claim, Kind::Premise, Kind::Premise].choose(rng).unwrap()
}

/// Gives every premise a target other than itself; a premise without any
/// other component becomes a claim.
fn fix_links(comps: &mut [Comp], rng: &mut ChaCha8Rng, keep: impl Fn(usize, &Comp) -> Option<usize>) {
    let n = comps.len();
    for k in 0..n {
        if comps[k].kind != Kind::Premise {
            comps[k].target = None;
            continue;
        }
        if n == 1 {
            comps[k].kind = Kind::Claim;
            comps[k].target = None;
            continue;
        }
        let t = keep(k, &comps[k]).filter(|&t| t != k && t < n).unwrap_or_else(|| loop {
            let t = rng.gen_range(0..n);
            if t != k {
                break t;
            }
        });
        comps[k].target = Some(t);
    }
}

fn random_gold(rng: &mut ChaCha8Rng) -> Doc {
    let n = rng.gen_range(0..=MAX_COMPONENTS);
    let mut pos = 0;
    let mut comps = Vec::with_capacity(n);
    for _ in 0..n {
        pos += rng.gen_range(0..=2);
        let len = rng.gen_range(1..=6);
        comps.push(Comp {
            first: pos,
            last: pos + len - 1,
            kind: random_kind(rng),
            positive: rng.gen_bool(0.5),
            target: None,
            origin: None,
        });
        pos += len;
    }
    let len = (pos + rng.gen_range(0..=2)).max(1);
    fix_links(&mut comps, rng, |_, _| None);
    Doc { len, comps }
}

/// Drops, shifts, retypes and adds components, then keeps links to the
/// derived copy of the gold target most of the time.
fn perturb(gold: &Doc, rng: &mut ChaCha8Rng) -> Doc {
    let len = gold.len;
    let mut cands = Vec::new();
    for (g, c) in gold.comps.iter().enumerate() {
        if rng.gen_bool(0.15) {
            continue;
        }
        let mut p = c.clone();
        p.origin = Some(g);
        if rng.gen_bool(0.4) {
            let first = (p.first as i64 + rng.gen_range(-2..=2)).clamp(0, len as i64 - 1) as usize;
            let last = (p.last as i64 + rng.gen_range(-2..=2)).clamp(first as i64, len as i64 - 1) as usize;
            p.first = first;
            p.last = last;
        }
        if rng.gen_bool(0.15) {
            p.kind = random_kind(rng);
        }
        if rng.gen_bool(0.15) {
            p.positive = !p.positive;
        }
        cands.push(p);
    }
    for _ in 0..rng.gen_range(0..=2) {
        let first = rng.gen_range(0..len);
        let last = rng.gen_range(first..len.min(first + 4));
        cands.push(Comp {
            first,
            last,
            kind: random_kind(rng),
            positive: rng.gen_bool(0.5),
            target: None,
            origin: None,
        });
    }
    cands.sort_by_key(|c| c.first);
    let mut comps: Vec<Comp> = Vec::new();
    for c in cands {
        if comps.last().map_or(true, |p| c.first > p.last) {
            comps.push(c);
        }
    }
    let by_origin: Vec<Option<usize>> = comps.iter().map(|c| c.origin).collect();
    let faithful: Vec<bool> = comps.iter().map(|_| rng.gen_bool(0.8)).collect();
    fix_links(&mut comps, rng, |k, c| {
        let gold_target = gold.comps.get(c.origin?)?.target?;
        faithful[k].then(|| by_origin.iter().position(|&o| o == Some(gold_target)))?
    });
    Doc { len, comps }
}

fn shared_tokens(g: &Comp, p: &Comp) -> usize {
    (g.first..=g.last).filter(|i| (p.first..=p.last).contains(i)).count()
}

fn same_component(g: &Comp, p: &Comp, level: MatchLevel) -> bool {
    let spans = match level {
        MatchLevel::Exact => g.first == p.first && g.last == p.last,
        MatchLevel::Approximate => {
            let s = shared_tokens(g, p);
            s > 0 && 2 * s >= g.last - g.first + 1
        }
    };
    g.kind == p.kind && spans
}

/// Each gold item, in order, claims the first unclaimed matching prediction.
fn oracle_f1(gold: &Doc, pred: &Doc, target: AmTarget, level: MatchLevel) -> f64 {
    let items = |d: &Doc| -> Vec<usize> {
        (0..d.comps.len())
            .filter(|&i| target == AmTarget::Component || d.comps[i].target.is_some())
            .collect()
    };
    let (gi, pi) = (items(gold), items(pred));
    let matches = |j: usize, i: usize| {
        let (g, p) = (&gold.comps[j], &pred.comps[i]);
        match target {
            AmTarget::Component => same_component(g, p, level),
            AmTarget::Relation => {
                g.positive == p.positive
                    && same_component(g, p, level)
                    && same_component(&gold.comps[g.target.unwrap()], &pred.comps[p.target.unwrap()], level)
            }
        }
    };
    let mut used = vec![false; pi.len()];
    let mut tp = 0;
    for &j in &gi {
        if let Some(k) = (0..pi.len()).find(|&k| !used[k] && matches(j, pi[k])) {
            used[k] = true;
            tp += 1;
        }
    }
    let (fp, fn_) = (pi.len() - tp, gi.len() - tp);
    if 2 * tp + fp + fn_ == 0 {
        0.0
    } else {
        2.0 * tp as f64 / (2 * tp + fp + fn_) as f64
    }
}

fn results(gold: &Doc, pred: &Doc) -> ResultList {
    ResultList {
        sentences: vec![ResultSentence {
            tokens: (0..gold.len).map(|i| format!("w{i}")).collect(),
            gold: gold.labels(),
            pred: pred.labels(),
        }],
        doc_starts: Some(vec![0]),
    }
}

const METRICS: [(AmTarget, MatchLevel); 4] = [
    (AmTarget::Component, MatchLevel::Approximate),
    (AmTarget::Component, MatchLevel::Exact),
    (AmTarget::Relation, MatchLevel::Approximate),
    (AmTarget::Relation, MatchLevel::Exact),
];

fn library(gold: &Doc, pred: &Doc) -> Result<[f64; 4], String> {
    let r = results(gold, pred);
    let mut out = [0.0; 4];
    for (slot, (t, l)) in out.iter_mut().zip(METRICS) {
        *slot = am_f1(&r, t, l, &AmAliases::default(), false).map_err(|e| e.to_string())?;
    }
    Ok(out)
}

fn comp(first: usize, words: usize, kind: Kind, positive: bool, target: Option<usize>) -> Comp {
    Comp {
        first,
        last: first + words - 1,
        kind,
        positive,
        target,
        origin: None,
    }
}

/// The abridged cloning essay: MC1 C1 C2 P1 P2 P3 P4 P5 C5 P9 P10 P11 with
/// word counts of the bracketed spans and a few outside tokens between.
fn fixture() -> Doc {
    use Kind::*;
    let spec: [(usize, usize, Kind, bool, Option<usize>); 12] = [
        (3, 7, Major, true, None),
        (1, 9, Claim, true, None),
        (3, 14, Claim, true, None),
        (1, 13, Premise, true, Some(2)),
        (1, 10, Premise, true, Some(3)),
        (3, 5, Premise, true, Some(2)),
        (2, 10, Premise, true, Some(5)),
        (1, 16, Premise, true, Some(5)),
        (2, 7, Claim, false, None),
        (3, 17, Premise, true, Some(8)),
        (2, 6, Premise, true, Some(11)),
        (1, 11, Premise, false, Some(8)),
    ];
    let mut pos = 0;
    let mut comps = Vec::new();
    for (gap, words, kind, positive, target) in spec {
        pos += gap;
        comps.push(comp(pos, words, kind, positive, target));
        pos += words;
    }
    Doc { len: pos + 1, comps }
}

pub fn run() -> Verdict {
    let fx = fixture();
    let expected_labels = ["B:P:-1:Supp", "B:P:-1:Supp", "B:P:-3:Supp", "B:P:-1:Supp", "B:P:-2:Supp"];
    let labels = fx.labels();
    for (k, want) in (3..8).zip(expected_labels) {
        ensure(labels[fx.comps[k].first] == want, || format!("fixture component {k} renders as {}", labels[fx.comps[k].first]))?;
    }
    let perfect = library(&fx, &fx)?;
    ensure(perfect == [1.0; 4], || format!("fixture under perfect prediction scores {perfect:?}"))?;

    // P3 spans five words; the prediction covers only its last three.
    let mut shifted = fx.clone();
    shifted.comps[5].first += 2;
    let got = library(&fx, &shifted)?;
    let want: Vec<f64> = METRICS.iter().map(|&(t, l)| oracle_f1(&fx, &shifted, t, l)).collect();
    ensure(got.as_slice() == want.as_slice(), || format!("shifted premise: {got:?} vs oracle {want:?}"))?;
    ensure(got[0] == 1.0 && got[1] == 22.0 / 24.0, || format!("shifted premise component scores {got:?}"))?;

    let mut retargeted = fx.clone();
    let n = fx.comps.len();
    for (k, c) in retargeted.comps.iter_mut().enumerate() {
        if let Some(t) = c.target {
            c.target = Some((t + 1..t + n).map(|x| x % n).find(|&x| x != k).unwrap());
        }
    }
    let got = library(&fx, &retargeted)?;
    ensure(got == [1.0, 1.0, 0.0, 0.0], || format!("retargeted links score {got:?}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut nontrivial = 0;
    for case in 0..DOCUMENTS {
        let gold = random_gold(&mut rng);
        let pred = perturb(&gold, &mut rng);
        let got = library(&gold, &pred).map_err(|e| format!("case {case}: {e}"))?;
        for (m, &(t, l)) in METRICS.iter().enumerate() {
            let want = oracle_f1(&gold, &pred, t, l);
            ensure(got[m] == want, || format!("case {case}: {t:?} {l:?} library {} oracle {want}", got[m]))?;
        }
        ensure(got[1] <= got[0] && got[3] <= got[2], || format!("case {case}: exact exceeds approximate {got:?}"))?;
        if got.iter().any(|&f| f > 0.0 && f < 1.0) {
            nontrivial += 1;
        }
    }
    Ok(format!("fixture scores 1.0; {DOCUMENTS} fuzz documents agree exactly ({nontrivial} with partial scores)"))
}
