//! Depth-stratified accuracy and the shuffled-context protocol.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datagen::{DatasetSplit, Example};
use crate::embeddings::EmbeddingTable;
use crate::logic::{answer, parse_context, parse_question, shuffle_seed, shuffle_sentences};
use crate::model::{forward, ModelError, ModelParams};
use crate::rng::hash_str;

/// Anything that maps an example to a probability of "true".
pub trait Predictor: Sync {
    fn predict(&self, example: &Example) -> Result<f64, ModelError>;
}

/// Parameters together with the word vectors they were trained against.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub params: ModelParams,
    pub table: EmbeddingTable,
}

impl Predictor for TrainedModel {
    fn predict(&self, example: &Example) -> Result<f64, ModelError> {
        Ok(forward(&self.params, &self.table, example)?.probability)
    }
}

impl<P: Predictor + ?Sized> Predictor for &P {
    fn predict(&self, example: &Example) -> Result<f64, ModelError> {
        (**self).predict(example)
    }
}

/// Answers with the symbolic oracle: probability 1 or 0. Examples the
/// oracle cannot parse get 0.5.
#[derive(Debug, Clone, Copy, Default)]
pub struct OraclePredictor;

impl Predictor for OraclePredictor {
    fn predict(&self, example: &Example) -> Result<f64, ModelError> {
        let verdict = parse_context(&example.context)
            .and_then(|kb| answer(&kb, &parse_question(&example.question)?));
        Ok(match verdict {
            Ok(v) if v.label => 1.0,
            Ok(_) => 0.0,
            Err(_) => 0.5,
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub n_total: usize,
    pub n_correct: usize,
}

impl Cell {
    /// `n_correct / n_total`, or 0 for an empty cell.
    pub fn accuracy(&self) -> f64 {
        if self.n_total == 0 {
            0.0
        } else {
            self.n_correct as f64 / self.n_total as f64
        }
    }

    fn add(&mut self, correct: bool) {
        self.n_total += 1;
        self.n_correct += usize::from(correct);
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Metrics {
    pub overall: Cell,
    pub by_depth: BTreeMap<u32, Cell>,
}

impl Metrics {
    pub fn accuracy(&self) -> f64 {
        self.overall.accuracy()
    }

    /// Tallies `(depth, correct)` outcomes.
    pub fn from_outcomes(outcomes: impl IntoIterator<Item = (u32, bool)>) -> Self {
        let mut m = Metrics::default();
        for (depth, correct) in outcomes {
            m.overall.add(correct);
            m.by_depth.entry(depth).or_default().add(correct);
        }
        m
    }
}

/// Probabilities for every example, in order. Runs on the rayon pool; the
/// result does not depend on the number of threads.
pub fn predict_all<P: Predictor>(model: &P, examples: &[Example]) -> Result<Vec<f64>, ModelError> {
    examples.par_iter().map(|e| model.predict(e)).collect()
}

/// Accuracy of `prediction ≥ threshold` against the labels, overall and per
/// depth tag.
pub fn evaluate<P: Predictor>(
    model: &P,
    split: &DatasetSplit,
    threshold: f64,
) -> Result<Metrics, ModelError> {
    let probs = predict_all(model, &split.examples)?;
    Ok(Metrics::from_outcomes(
        split
            .examples
            .iter()
            .zip(probs)
            .map(|(e, p)| (e.depth, (p >= threshold) == e.label)),
    ))
}

/// Accuracy on the split as given and with every context shuffled.
#[derive(Debug, Clone, PartialEq)]
pub struct OodResult {
    pub original: Metrics,
    pub shuffled: Metrics,
}

impl OodResult {
    /// Shuffled minus original accuracy, overall (`None` key) and per depth.
    pub fn delta(&self) -> BTreeMap<Option<u32>, f64> {
        let mut out = BTreeMap::new();
        out.insert(None, self.shuffled.accuracy() - self.original.accuracy());
        for (d, c) in &self.original.by_depth {
            let s = self.shuffled.by_depth.get(d).copied().unwrap_or_default();
            out.insert(Some(*d), s.accuracy() - c.accuracy());
        }
        out
    }
}

/// Seed used to shuffle one example's context in [`ood_eval`].
pub fn ood_shuffle_seed(seed: u64, example: &Example) -> u64 {
    shuffle_seed(seed, &[hash_str(&example.id)])
}

pub fn shuffled_split(split: &DatasetSplit, seed: u64) -> DatasetSplit {
    DatasetSplit::new(
        split.name,
        split
            .examples
            .iter()
            .map(|e| shuffle_sentences(e, ood_shuffle_seed(seed, e)))
            .collect(),
    )
}

pub fn ood_eval<P: Predictor>(
    model: &P,
    split: &DatasetSplit,
    seed: u64,
) -> Result<OodResult, ModelError> {
    Ok(OodResult {
        original: evaluate(model, split, 0.5)?,
        shuffled: evaluate(model, &shuffled_split(split, seed), 0.5)?,
    })
}
