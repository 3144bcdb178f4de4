use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use mtl_tagger::corpus::{parse_conll, read_conll, ColumnSpec, RawConll};
use mtl_tagger::labels::{derive_subtask, parse_am_sequence, AmAliases, Repair, Subtask};
use mtl_tagger::metrics::{evaluate as score, MetricKind, MetricOptions, ResultList, ResultSentence};
use mtl_tagger::network::Tagger;
use mtl_tagger::run::{run_experiment, run_search_experiment, scores_tsv, RunConfig, RunError};
use mtl_tagger::training::{load_model, result_list, CHECKPOINT_FILE};

use crate::conll::{self, append_column, column, documents, read_text, render, replace_column, write_text};
use crate::{BioRepair, CmdResult, DeriveArgs, EvaluateArgs, PostprocessArgs, PredictArgs, StatsArgs, TrainArgs};

/// Relative outputs go under `$MTLTAG_RESULTS_DIR` when it is set.
fn output_dir(p: &Path) -> PathBuf {
    match std::env::var_os(crate::RESULTS_DIR_VAR) {
        Some(root) if p.is_relative() => PathBuf::from(root).join(p),
        _ => p.to_owned(),
    }
}

fn config_base(config: &Path) -> PathBuf {
    config
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
        .map_or_else(|| PathBuf::from("."), Path::to_owned)
}

fn stem(config: &Path) -> String {
    config
        .file_stem()
        .map_or_else(|| "run".to_owned(), |s| s.to_string_lossy().into_owned())
}

pub fn train(a: &TrainArgs) -> CmdResult {
    let cfg = RunConfig::from_yaml(&read_text(&a.config)?, &a.overrides)?;
    let out = a
        .output
        .clone()
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| Path::new("runs").join(stem(&a.config)));
    let out = output_dir(&out);
    let result = run_experiment(&cfg, &config_base(&a.config), Some(&out))?;
    print!("{}", scores_tsv(&result.scores));
    eprintln!(
        "best epoch {} of {}; checkpoint {}",
        result.best_epoch,
        result.log.len(),
        out.join(CHECKPOINT_FILE).display()
    );
    Ok(())
}

pub fn search(a: &TrainArgs) -> CmdResult {
    let text = read_text(&a.config)?;
    let out = a
        .output
        .clone()
        .unwrap_or_else(|| Path::new("search").join(stem(&a.config)));
    let out = output_dir(&out);
    let report = run_search_experiment(&text, &config_base(&a.config), &a.overrides, Some(&out))?;
    print!("{}", report.to_tsv());
    match report.winner() {
        Some(w) => {
            eprintln!("winner: trial {} (mean {})", w.index, w.mean.unwrap_or(f64::NAN));
            if let Some(m) = report.final_mean() {
                eprintln!("final mean over {} seeds: {m}", report.final_results.len());
            }
        }
        None => eprintln!("every trial failed"),
    }
    eprintln!("results in {}", out.display());
    Ok(())
}

fn task_of(model: &Tagger, name: Option<&str>) -> Result<usize, RunError> {
    match name {
        Some(n) => Ok(model.task_index(n)?),
        None => Ok(0),
    }
}

pub fn predict(a: &PredictArgs) -> CmdResult {
    let model = load_model(&a.model)?;
    let task = task_of(&model, a.task.as_deref())?;
    let text = read_text(&a.input)?;
    let mut raw = RawConll::parse(&text);
    let corpus = parse_conll(&text, &ColumnSpec::new(a.token_column))?;
    let preds = model.predict_all(&corpus.sentences, task)?;
    let preds = conll::repair(preds, &documents(&raw), a.postprocess)?;
    append_column(&mut raw, &preds);
    write_text(&render(&raw), a.output.as_deref())
}

fn parse_metrics(names: &[String]) -> Result<Vec<MetricKind>, RunError> {
    names
        .iter()
        .map(|n| n.trim().parse::<MetricKind>().map_err(RunError::Config))
        .collect()
}

pub fn evaluate(a: &EvaluateArgs) -> CmdResult {
    let metrics = parse_metrics(&a.metrics)?;
    let (results, inventory) = match (&a.model, &a.predictions) {
        (Some(model_path), None) => {
            let (Some(input), Some(col)) = (&a.input, a.label_column) else {
                return Err(RunError::Config("--model needs --input and --label-column".into()));
            };
            let model = load_model(model_path)?;
            let task = task_of(&model, a.task.as_deref())?;
            let name = model.config.tasks[task].name.clone();
            let corpus = read_conll(input, &ColumnSpec::new(a.token_column).with_label(name, col))?;
            (result_list(&model, task, &corpus)?, model.config.tasks[task].labels.clone())
        }
        (None, Some(path)) => {
            let raw = RawConll::parse(&read_text(path)?);
            let pred_col = match a.pred_column {
                Some(c) => c,
                None => raw
                    .sentences
                    .first()
                    .and_then(|s| s.first())
                    .map_or(0, |cols| cols.len().saturating_sub(1)),
            };
            let tokens = column(&raw, a.token_column)?;
            let gold = column(&raw, a.gold_column)?;
            let pred = column(&raw, pred_col)?;
            let sentences = tokens
                .into_iter()
                .zip(gold)
                .zip(pred)
                .map(|((tokens, gold), pred)| ResultSentence { tokens, gold, pred })
                .collect();
            let results = ResultList {
                sentences,
                doc_starts: raw.doc_starts.clone(),
            };
            (results, Vec::new())
        }
        _ => return Err(RunError::Config("give either --model or --predictions".into())),
    };
    let mut opts = MetricOptions {
        bio_repair: a.bio_repair.map(|r| match r {
            BioRepair::ToBegin => Repair::ToBegin,
            BioRepair::ToOutside => Repair::ToOutside,
        }),
        am_postprocess: !a.no_am_postprocess,
        inventory,
        ..Default::default()
    };
    if let Some(s) = &a.empty_symbol {
        opts.empty_symbol = s.clone();
    }
    if let Some(s) = &a.join_symbol {
        opts.join_symbol = s.clone();
    }
    let mut out = String::new();
    for (m, v) in score(&results, &metrics, &opts)? {
        let _ = writeln!(out, "{m}\t{v}");
    }
    print!("{out}");
    Ok(())
}

pub fn stats(a: &StatsArgs) -> CmdResult {
    let cols = ColumnSpec::new(a.token_column).with_label("label", a.label_column);
    let mut out = String::from("file\tdocs\ttokens\tlabels\tentropy\tkurtosis\n");
    for f in &a.files {
        let corpus = read_conll(f, &cols)?;
        let dist = corpus.label_distribution("label");
        let entropy = dist.entropy().map_or_else(|_| "NA".to_owned(), |h| h.to_string());
        let kurtosis = match dist.kurtosis() {
            Ok(k) => k.to_string(),
            Err(e) => {
                eprintln!("{}: kurtosis: {e}", f.display());
                "NA".to_owned()
            }
        };
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{entropy}\t{kurtosis}",
            f.display(),
            corpus.documents().len(),
            corpus.num_tokens(),
            dist.num_labels()
        );
    }
    print!("{out}");
    Ok(())
}

pub fn derive_subtasks(a: &DeriveArgs) -> CmdResult {
    let kinds: Vec<Subtask> = a
        .subtasks
        .iter()
        .map(|s| s.trim().parse().map_err(|e: mtl_tagger::labels::LabelError| RunError::Config(e.to_string())))
        .collect::<Result<_, _>>()?;
    let mut raw = RawConll::parse(&read_text(&a.input)?);
    let labels = column(&raw, a.label_column)?;
    let docs = documents(&raw);
    let aliases = AmAliases::default();
    for kind in kinds {
        let derived = conll::per_document(&labels, &docs, |flat| {
            let parsed = parse_am_sequence(flat, &aliases).map_err(|e| RunError::Data(e.to_string()))?;
            Ok(derive_subtask(&parsed, kind))
        })?;
        append_column(&mut raw, &derived);
    }
    write_text(&render(&raw), a.output.as_deref())
}

pub fn postprocess(a: &PostprocessArgs) -> CmdResult {
    let mut raw = RawConll::parse(&read_text(&a.input)?);
    let labels = column(&raw, a.label_column)?;
    let fixed = conll::repair(labels, &documents(&raw), a.scheme)?;
    replace_column(&mut raw, a.label_column, &fixed);
    write_text(&render(&raw), a.output.as_deref())
}
