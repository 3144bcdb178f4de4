use super::TrainError;
use crate::corpus::Corpus;
use crate::metrics::{evaluate, MetricKind, MetricOptions, ResultList, ResultSentence};
use crate::network::Tagger;

/// Scores a model on held-out data between epochs.
pub trait DevScorer {
    fn score(&mut self, model: &Tagger) -> Result<f64, TrainError>;
}

/// Predicts a labelled corpus and reports one metric.
#[derive(Clone, Debug)]
pub struct MetricScorer {
    pub task: usize,
    pub corpus: Corpus,
    pub metric: MetricKind,
    pub options: MetricOptions,
}

/// Pairs a corpus' gold labels of `task` with predictions.
pub fn result_list(model: &Tagger, task: usize, corpus: &Corpus) -> Result<ResultList, TrainError> {
    let name = &model.config.tasks[task].name;
    let preds = model.predict_all(&corpus.sentences, task)?;
    let sentences = corpus
        .sentences
        .iter()
        .zip(preds)
        .enumerate()
        .map(|(i, (s, pred))| {
            Ok(ResultSentence {
                tokens: s.surfaces().map(str::to_owned).collect(),
                gold: s
                    .labels(name)
                    .ok_or_else(|| TrainError::Data(format!("sentence {i} lacks labels for task {name:?}")))?,
                pred,
            })
        })
        .collect::<Result<_, TrainError>>()?;
    Ok(ResultList {
        sentences,
        doc_starts: corpus.doc_starts.clone(),
    })
}

impl DevScorer for MetricScorer {
    fn score(&mut self, model: &Tagger) -> Result<f64, TrainError> {
        let results = result_list(model, self.task, &self.corpus)?;
        Ok(evaluate(&results, &[self.metric], &self.options)?[0].1)
    }
}

/// Replays a fixed list of scores, one per call.
#[derive(Clone, Debug)]
pub struct ScriptedScorer {
    scores: Vec<f64>,
    next: usize,
}

impl ScriptedScorer {
    pub fn new(scores: Vec<f64>) -> Self {
        ScriptedScorer { scores, next: 0 }
    }
}

impl DevScorer for ScriptedScorer {
    fn score(&mut self, _: &Tagger) -> Result<f64, TrainError> {
        let s = *self
            .scores
            .get(self.next)
            .ok_or_else(|| TrainError::Config("scripted scores exhausted".into()))?;
        self.next += 1;
        Ok(s)
    }
}
