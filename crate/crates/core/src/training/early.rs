use serde::{Deserialize, Serialize};

use crate::metrics::MetricKind;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EarlyStoppingConfig {
    /// Task whose dev score is monitored.
    pub task: String,
    pub metric: MetricKind,
    pub patience: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Observation {
    pub improved: bool,
    pub stop: bool,
}

/// Patience counter over a sequence of dev scores. Only a strict
/// improvement over the best score so far resets the counter.
#[derive(Clone, Debug)]
pub struct EarlyStopping {
    patience: usize,
    higher_is_better: bool,
    best: Option<(usize, f64)>,
    seen: usize,
}

impl EarlyStopping {
    pub fn new(patience: usize, higher_is_better: bool) -> Self {
        assert!(patience >= 1, "patience must be at least 1");
        EarlyStopping {
            patience,
            higher_is_better,
            best: None,
            seen: 0,
        }
    }

    /// Records the score of the next epoch (1-based epochs).
    pub fn observe(&mut self, score: f64) -> Observation {
        self.seen += 1;
        let improved = match self.best {
            None => true,
            Some((_, b)) if self.higher_is_better => score > b,
            Some((_, b)) => score < b,
        };
        if improved {
            self.best = Some((self.seen, score));
        }
        let best_epoch = self.best.map_or(0, |(e, _)| e);
        Observation {
            improved,
            stop: self.seen - best_epoch >= self.patience,
        }
    }

    /// Epoch (1-based) and score of the best observation.
    pub fn best(&self) -> Option<(usize, f64)> {
        self.best
    }
}
