use std::collections::BTreeMap;

use super::CorpusError;

/// Label histogram of one task.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LabelDistribution {
    counts: BTreeMap<String, u64>,
}

impl LabelDistribution {
    pub fn from_labels<'a>(labels: impl IntoIterator<Item = &'a str>) -> Self {
        let mut counts = BTreeMap::new();
        for l in labels {
            *counts.entry(l.to_owned()).or_insert(0) += 1;
        }
        LabelDistribution { counts }
    }

    pub fn from_counts(counts: impl IntoIterator<Item = (String, u64)>) -> Self {
        LabelDistribution {
            counts: counts.into_iter().collect(),
        }
    }

    pub fn counts(&self) -> &BTreeMap<String, u64> {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn num_labels(&self) -> usize {
        self.counts.len()
    }

    /// Relative frequency of every label in the inventory.
    pub fn frequencies(&self) -> Result<Vec<f64>, CorpusError> {
        let total = self.total();
        if total == 0 {
            return Err(CorpusError::EmptyDistribution);
        }
        Ok(self
            .counts
            .values()
            .map(|&c| c as f64 / total as f64)
            .collect())
    }

    /// Shannon entropy in bits.
    pub fn entropy(&self) -> Result<f64, CorpusError> {
        let h: f64 = self
            .frequencies()?
            .into_iter()
            .filter(|&p| p > 0.0)
            .map(|p| -p * p.log2())
            .sum();
        // -0.0 for a single label reads badly in reports.
        Ok(h.max(0.0))
    }

    /// Kurtosis `m₄ / m₂²` of the vector of per-label relative frequencies.
    pub fn kurtosis(&self) -> Result<f64, CorpusError> {
        kurtosis(&self.frequencies()?)
    }
}

/// `k`-th central moment with the biased `1/n` normalisation.
pub fn central_moment(values: &[f64], k: i32) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.iter().map(|x| (x - mean).powi(k)).sum::<f64>() / n
}

/// Kurtosis `g₂ = m₄ / m₂²` of a sample (3 for a normal distribution).
pub fn kurtosis(values: &[f64]) -> Result<f64, CorpusError> {
    if values.len() < 2 {
        return Err(CorpusError::TooFewValues(values.len()));
    }
    let m2 = central_moment(values, 2);
    if m2 <= 0.0 {
        return Err(CorpusError::UndefinedKurtosis);
    }
    Ok(central_moment(values, 4) / (m2 * m2))
}
