use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{render_template, template_variables, yaml_scalar, Assignment, HyperoptError, SearchSpace};
use crate::training::CHECKPOINT_FILE;

fn three() -> usize {
    3
}

/// The `search` section of a run configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchConfig {
    pub trials: usize,
    /// Training runs per trial.
    #[serde(default = "three")]
    pub seeds: usize,
    /// Extra runs of the winning configuration.
    #[serde(default)]
    pub final_seeds: usize,
    #[serde(default)]
    pub master_seed: u64,
    /// Run trials on several threads.
    #[serde(default)]
    pub parallel_trials: bool,
    /// Run the seeds of one trial on several threads.
    #[serde(default)]
    pub parallel_seeds: bool,
    pub space: SearchSpace,
}

impl SearchConfig {
    pub fn validate(&self) -> Result<(), HyperoptError> {
        if self.trials == 0 || self.seeds == 0 {
            return Err(HyperoptError::Space("trials and seeds must be at least 1".into()));
        }
        self.space.validate()
    }
}

/// Seed of one training run, a pure function of its coordinates.
pub fn derive_seed(master: u64, trial: usize, seed: usize) -> u64 {
    let mut h = Sha256::new();
    h.update(b"trial-seed");
    h.update(master.to_le_bytes());
    h.update((trial as u64).to_le_bytes());
    h.update((seed as u64).to_le_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("digest has 32 bytes"))
}

/// One training run handed to the runner.
#[derive(Clone, Debug)]
pub struct RunRequest<'a> {
    pub trial: usize,
    pub seed_index: usize,
    pub seed: u64,
    /// Rendered configuration text.
    pub config: &'a str,
    /// Directory reserved for this run's outputs.
    pub dir: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub index: usize,
    pub assignment: Assignment,
    pub rendered: String,
    pub seeds: Vec<u64>,
    /// Dev score or failure message per seed.
    pub results: Vec<Result<f64, String>>,
    pub mean: Option<f64>,
}

impl TrialRecord {
    pub fn failed(&self) -> bool {
        self.mean.is_none()
    }

    pub fn error(&self) -> Option<&str> {
        self.results.iter().find_map(|r| r.as_ref().err().map(String::as_str))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchReport {
    pub trials: Vec<TrialRecord>,
    /// Indices of successful trials, best first.
    pub ranking: Vec<usize>,
    /// Number of runner calls made while ranking.
    pub runs: usize,
    pub final_results: Vec<Result<f64, String>>,
}

impl SearchReport {
    pub fn winner(&self) -> Option<&TrialRecord> {
        self.ranking.first().map(|&i| &self.trials[i])
    }

    pub fn final_mean(&self) -> Option<f64> {
        mean(&self.final_results)
    }

    /// Tab-separated table: ranked trials first, failed trials last.
    pub fn to_tsv(&self) -> String {
        let vars: Vec<&String> = self
            .trials
            .first()
            .map(|t| t.assignment.keys().collect())
            .unwrap_or_default();
        let mut out = String::from("rank\ttrial\tstatus\tmean\tscores");
        for v in &vars {
            let _ = write!(out, "\t{v}");
        }
        out.push('\n');
        let failed = self.trials.iter().filter(|t| t.failed()).map(|t| t.index);
        let rows = self.ranking.iter().copied().map(Some).chain(failed.map(|_| None));
        let mut failed = self.trials.iter().filter(|t| t.failed());
        for (rank, row) in rows.enumerate() {
            let t = match row {
                Some(i) => &self.trials[i],
                None => failed.next().expect("counted above"),
            };
            let scores: Vec<String> = t
                .results
                .iter()
                .map(|r| r.as_ref().map_or_else(|_| "NA".to_owned(), |s| s.to_string()))
                .collect();
            let (rank, status, mean) = match t.mean {
                Some(m) => ((rank + 1).to_string(), "ok".to_owned(), m.to_string()),
                None => (
                    "-".to_owned(),
                    format!("failed: {}", t.error().unwrap_or("").replace(['\t', '\n'], " ")),
                    "NA".to_owned(),
                ),
            };
            let _ = write!(out, "{rank}\t{}\t{status}\t{mean}\t{}", t.index, scores.join(","));
            for v in &vars {
                let _ = write!(out, "\t{}", t.assignment.get(*v).map(yaml_scalar).unwrap_or_default());
            }
            out.push('\n');
        }
        out
    }
}

fn mean(results: &[Result<f64, String>]) -> Option<f64> {
    let scores: Vec<f64> = results.iter().map(|r| r.clone().ok()).collect::<Option<_>>()?;
    if scores.is_empty() {
        return None;
    }
    Some(scores.iter().sum::<f64>() / scores.len() as f64)
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> HyperoptError + '_ {
    move |source| HyperoptError::Io {
        path: path.to_owned(),
        source,
    }
}

fn run_seeds<R>(
    runner: &R,
    trial: usize,
    rendered: &str,
    seeds: &[(usize, u64)],
    dir: Option<&Path>,
    parallel: bool,
) -> Vec<Result<f64, String>>
where
    R: Fn(&RunRequest) -> Result<f64, String> + Sync,
{
    let one = |&(k, seed): &(usize, u64)| {
        let req = RunRequest {
            trial,
            seed_index: k,
            seed,
            config: rendered,
            dir: dir.map(|d| d.join(format!("seed_{k}"))),
        };
        if let Some(d) = &req.dir {
            std::fs::create_dir_all(d).map_err(|e| format!("{}: {e}", d.display()))?;
        }
        match runner(&req) {
            Ok(s) if s.is_nan() => Err("dev score is NaN".to_owned()),
            other => other,
        }
    };
    if parallel {
        seeds.par_iter().map(one).collect()
    } else {
        seeds.iter().map(one).collect()
    }
}

/// A sampled and rendered trial that has not run yet.
#[derive(Clone, Debug, PartialEq)]
pub struct PlannedTrial {
    pub index: usize,
    pub assignment: Assignment,
    pub rendered: String,
    pub seeds: Vec<u64>,
}

/// Samples and renders all trials. The list depends only on the template,
/// the space and the master seed.
pub fn plan_trials(template: &str, search: &SearchConfig) -> Result<Vec<PlannedTrial>, HyperoptError> {
    search.validate()?;
    for name in template_variables(template) {
        if !search.space.variables.contains_key(&name) {
            return Err(HyperoptError::Unbound(name));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(search.master_seed);
    (0..search.trials)
        .map(|index| {
            let assignment = search.space.sample_trial(&mut rng);
            let rendered = render_template(template, &assignment)?;
            let seeds = (0..search.seeds).map(|k| derive_seed(search.master_seed, index, k)).collect();
            Ok(PlannedTrial {
                index,
                assignment,
                rendered,
                seeds,
            })
        })
        .collect()
}

/// Random search over `space`, with `template` rendered once per trial.
///
/// Every trial runs all of its seeds; a trial with any failed run is
/// reported but left out of the ranking. When `results_dir` is given each
/// trial gets `trial_NNN/` with the rendered config, per-seed directories,
/// a score table and a copy of the best seed's checkpoint.
pub fn run_search<R>(
    template: &str,
    search: &SearchConfig,
    higher_is_better: bool,
    results_dir: Option<&Path>,
    runner: R,
) -> Result<SearchReport, HyperoptError>
where
    R: Fn(&RunRequest) -> Result<f64, String> + Sync,
{
    let planned = plan_trials(template, search)?;
    if let Some(root) = results_dir {
        for PlannedTrial { index, rendered, .. } in &planned {
            let dir = root.join(format!("trial_{index:03}"));
            std::fs::create_dir_all(&dir).map_err(io(&dir))?;
            let path = dir.join("config.yaml");
            std::fs::write(&path, rendered).map_err(io(&path))?;
        }
    }

    let execute = |PlannedTrial {
                       index,
                       assignment,
                       rendered,
                       seeds,
                   }: PlannedTrial| {
        let dir = results_dir.map(|r| r.join(format!("trial_{index:03}")));
        let indexed: Vec<(usize, u64)> = seeds.iter().copied().enumerate().collect();
        let results = run_seeds(&runner, index, &rendered, &indexed, dir.as_deref(), search.parallel_seeds);
        let mean = mean(&results);
        if let Some(dir) = &dir {
            persist_trial(dir, &seeds, &results, higher_is_better)?;
        }
        Ok(TrialRecord {
            index,
            assignment,
            rendered,
            seeds,
            results,
            mean,
        })
    };
    let trials: Vec<TrialRecord> = if search.parallel_trials {
        planned.into_par_iter().map(execute).collect::<Result<_, HyperoptError>>()?
    } else {
        planned.into_iter().map(execute).collect::<Result<_, HyperoptError>>()?
    };
    let runs = trials.iter().map(|t| t.results.len()).sum();

    let mut ranking: Vec<usize> = trials.iter().filter(|t| !t.failed()).map(|t| t.index).collect();
    // Stable sort keeps the lower index first among equal means.
    ranking.sort_by(|&a, &b| {
        let (x, y) = (trials[a].mean.unwrap(), trials[b].mean.unwrap());
        if higher_is_better {
            y.total_cmp(&x)
        } else {
            x.total_cmp(&y)
        }
    });

    let mut final_results = Vec::new();
    if let (Some(&w), true) = (ranking.first(), search.final_seeds > 0) {
        let t = &trials[w];
        let seeds: Vec<(usize, u64)> = (0..search.final_seeds)
            .map(|k| (k, derive_seed(search.master_seed, w, search.seeds + k)))
            .collect();
        let dir = results_dir.map(|r| r.join("final"));
        final_results = run_seeds(&runner, w, &t.rendered, &seeds, dir.as_deref(), search.parallel_seeds);
        if let Some(dir) = &dir {
            let plain: Vec<u64> = seeds.iter().map(|s| s.1).collect();
            persist_trial(dir, &plain, &final_results, higher_is_better)?;
        }
    }

    let report = SearchReport {
        trials,
        ranking,
        runs,
        final_results,
    };
    if let Some(root) = results_dir {
        let path = root.join("report.tsv");
        std::fs::write(&path, report.to_tsv()).map_err(io(&path))?;
    }
    Ok(report)
}

fn persist_trial(
    dir: &Path,
    seeds: &[u64],
    results: &[Result<f64, String>],
    higher_is_better: bool,
) -> Result<(), HyperoptError> {
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    let mut table = String::from("seed_index\tseed\tscore\terror\n");
    for (k, (seed, r)) in seeds.iter().zip(results).enumerate() {
        match r {
            Ok(s) => {
                let _ = writeln!(table, "{k}\t{seed}\t{s}\t");
            }
            Err(e) => {
                let _ = writeln!(table, "{k}\t{seed}\tNA\t{}", e.replace(['\t', '\n'], " "));
            }
        }
    }
    let path = dir.join("scores.tsv");
    std::fs::write(&path, table).map_err(io(&path))?;

    let best = results
        .iter()
        .enumerate()
        .filter_map(|(k, r)| r.as_ref().ok().map(|&s| (k, s)))
        .reduce(|a, b| {
            let better = if higher_is_better { b.1 > a.1 } else { b.1 < a.1 };
            if better {
                b
            } else {
                a
            }
        });
    if let Some((k, _)) = best {
        let src = dir.join(format!("seed_{k}")).join(CHECKPOINT_FILE);
        if src.exists() {
            let dst = dir.join(format!("best_{CHECKPOINT_FILE}"));
            std::fs::copy(&src, &dst).map_err(io(&dst))?;
        }
    }
    Ok(())
}
