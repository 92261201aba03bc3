//! Mini-batch Adam on binary cross-entropy.
//!
//! Examples are reshuffled every epoch. With `shuffle_rules_each_batch` each
//! example's context is permuted afresh every time it is drawn, using a
//! seed derived from (seed, epoch, batch, example id). Per-example gradients
//! are computed in parallel and summed in batch order, so results are
//! bit-identical for any thread count.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{evaluate, TrainConfig, TrainedModel};
use crate::datagen::{DatasetSplit, Example};
use crate::embeddings::{tokenize, EmbeddingTable};
use crate::logic::{shuffle_seed, shuffle_sentences};
use crate::model::{loss_and_grad, ModelError, ModelParams};
use crate::nn::{adam_step, AdamState, ParamSet, Tensor};
use crate::rng::{hash_str, mix64, Stream};

#[derive(Debug, thiserror::Error)]
pub enum TrainError {
    #[error("non-finite loss in epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },
    #[error("{0} split is empty")]
    EmptySplit(&'static str),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Per-epoch training record.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct History {
    /// Mean training loss of each epoch.
    pub epoch_losses: Vec<f64>,
    /// Dev accuracy after each epoch.
    pub dev_accuracy: Vec<f64>,
    /// Epoch (0-based) with the highest dev accuracy, first on ties.
    pub best_dev_epoch: Option<usize>,
    /// For every epoch, a digest of the context order each training example
    /// was presented in, indexed like the training split.
    #[serde(skip)]
    pub context_digests: Vec<Vec<u64>>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Final-epoch model.
    pub model: TrainedModel,
    /// Parameters after the best dev epoch, when `keep_best` is set.
    pub best: Option<ModelParams>,
    pub history: History,
}

/// Progress callback argument.
#[derive(Debug, Clone, Copy)]
pub struct EpochSummary {
    pub epoch: usize,
    pub loss: f64,
    pub dev_accuracy: f64,
}

fn order_digest(original: &Example, presented: &Example) -> u64 {
    // position of each original sentence in the presented order
    let mut h = 0u64;
    for s in &presented.context {
        let pos = original
            .context
            .iter()
            .position(|o| o == s)
            .unwrap_or(usize::MAX);
        h = mix64(h ^ pos as u64);
    }
    h
}

/// Sparse word-vector gradients of one example.
type TokenGrads = Vec<(usize, Vec<f64>)>;

struct Embeddings {
    index: BTreeMap<String, usize>,
    matrix: Tensor,
    adam: AdamState,
}

impl Embeddings {
    fn new(table: &EmbeddingTable, split: &DatasetSplit, lr: f64) -> Self {
        let mut index = BTreeMap::new();
        for e in &split.examples {
            for s in e.context.iter().chain(std::iter::once(&e.question)) {
                for t in tokenize(s).tokens {
                    let n = index.len();
                    index.entry(t).or_insert(n);
                }
            }
        }
        let dim = table.dimension();
        let mut matrix = Tensor::zeros(&[index.len(), dim]);
        for (t, &i) in &index {
            matrix.data_mut()[i * dim..(i + 1) * dim].copy_from_slice(&table.vector(t));
        }
        let adam = AdamState::new(&[&matrix], lr);
        Self {
            index,
            matrix,
            adam,
        }
    }

    fn write_back(&self, table: &mut EmbeddingTable) {
        for (t, &i) in &self.index {
            table.insert(t, self.matrix.row(i).to_vec());
        }
        table.duplicate_warnings = 0;
    }
}

/// Trains from `ModelParams::init(config, seed)`.
pub fn train(
    config: &TrainConfig,
    table: &EmbeddingTable,
    train_split: &DatasetSplit,
    dev_split: &DatasetSplit,
) -> Result<TrainOutcome, TrainError> {
    train_with_progress(config, table, train_split, dev_split, |_| {})
}

pub fn train_with_progress(
    config: &TrainConfig,
    table: &EmbeddingTable,
    train_split: &DatasetSplit,
    dev_split: &DatasetSplit,
    mut progress: impl FnMut(&EpochSummary),
) -> Result<TrainOutcome, TrainError> {
    config.validate().map_err(TrainError::InvalidConfig)?;
    if train_split.is_empty() {
        return Err(TrainError::EmptySplit("train"));
    }
    if dev_split.is_empty() {
        return Err(TrainError::EmptySplit("dev"));
    }
    let mut params = ModelParams::init(config.model_config(table.dimension()), config.seed);
    let mut table = table.clone();
    let mut adam = AdamState::new(&params.tensors(), config.learning_rate);
    let mut emb = config
        .train_embeddings
        .then(|| Embeddings::new(&table, train_split, config.learning_rate));
    let mut history = History::default();
    let mut best: Option<(f64, ModelParams)> = None;
    let order_root = Stream::new(config.seed).split(0x0e);
    let n = train_split.len();

    for epoch in 0..config.epochs {
        let order = order_root.split(epoch as u64).permutation(n);
        let mut digests = vec![0u64; n];
        let mut loss_sum = 0.0;
        for (batch, idx) in order.chunks(config.batch_size).enumerate() {
            let presented: Vec<Example> = idx
                .iter()
                .map(|&i| {
                    let ex = &train_split.examples[i];
                    if config.shuffle_rules_each_batch {
                        let seed = shuffle_seed(
                            config.seed,
                            &[epoch as u64, batch as u64, hash_str(&ex.id)],
                        );
                        shuffle_sentences(ex, seed)
                    } else {
                        ex.clone()
                    }
                })
                .collect();
            for (&i, p) in idx.iter().zip(&presented) {
                digests[i] = order_digest(&train_split.examples[i], p);
            }
            let per_example: Vec<(f64, ModelParams, TokenGrads)> = presented
                .par_iter()
                .map(|ex| example_grad(&params, &table, ex, emb.as_ref()))
                .collect::<Result<_, _>>()?;
            let scale = 1.0 / idx.len() as f64;
            let mut grads = params.zeros_like();
            let mut batch_loss = 0.0;
            let mut emb_grad = emb.as_ref().map(|e| Tensor::zeros_like(&e.matrix));
            for (loss, g, tg) in &per_example {
                batch_loss += loss;
                for (acc, t) in grads.tensors_mut().into_iter().zip(g.tensors()) {
                    crate::nn::axpy(scale, t.data(), acc.data_mut());
                }
                if let Some(eg) = emb_grad.as_mut() {
                    let dim = table.dimension();
                    for (row, gv) in tg {
                        crate::nn::axpy(scale, gv, &mut eg.data_mut()[row * dim..(row + 1) * dim]);
                    }
                }
            }
            if !batch_loss.is_finite() || !grads.tensors().iter().all(|t| t.all_finite()) {
                return Err(TrainError::NonFiniteLoss { epoch, batch });
            }
            loss_sum += batch_loss;
            let gt = grads.tensors();
            adam_step(&mut adam, params.tensors_mut(), &gt).map_err(ModelError::from)?;
            if let (Some(e), Some(eg)) = (emb.as_mut(), emb_grad) {
                adam_step(&mut e.adam, vec![&mut e.matrix], &[&eg]).map_err(ModelError::from)?;
                e.write_back(&mut table);
            }
        }
        let loss = loss_sum / n as f64;
        let model = TrainedModel {
            params: params.clone(),
            table: table.clone(),
        };
        let dev_accuracy = evaluate(&model, dev_split, 0.5)?.accuracy();
        history.epoch_losses.push(loss);
        history.dev_accuracy.push(dev_accuracy);
        history.context_digests.push(digests);
        if history
            .best_dev_epoch
            .is_none_or(|b| dev_accuracy > history.dev_accuracy[b])
        {
            history.best_dev_epoch = Some(epoch);
            if config.keep_best {
                best = Some((dev_accuracy, params.clone()));
            }
        }
        progress(&EpochSummary {
            epoch,
            loss,
            dev_accuracy,
        });
    }
    Ok(TrainOutcome {
        model: TrainedModel { params, table },
        best: best.map(|(_, p)| p),
        history,
    })
}

fn example_grad(
    params: &ModelParams,
    table: &EmbeddingTable,
    ex: &Example,
    emb: Option<&Embeddings>,
) -> Result<(f64, ModelParams, TokenGrads), ModelError> {
    let mut grads = params.zeros_like();
    let mut tg = Vec::new();
    let (loss, _) = loss_and_grad(
        params,
        table,
        ex,
        &mut grads,
        emb.is_some().then_some(&mut tg),
    )?;
    let mut sparse = Vec::new();
    if let Some(e) = emb {
        let tape_tokens = token_order(params, ex);
        for (t, g) in tape_tokens.iter().zip(tg) {
            if let Some(&row) = e.index.get(t) {
                sparse.push((row, g));
            }
        }
    }
    Ok((loss, grads, sparse))
}

/// Token order of [`crate::model::Tape::tokens`] without running the model.
fn token_order(params: &ModelParams, ex: &Example) -> Vec<String> {
    let mut out = Vec::new();
    if params.config.variant == crate::model::Variant::Baseline {
        out.extend(tokenize(&ex.context.join(" ")).tokens);
        out.extend(tokenize(&ex.question).tokens);
    } else {
        out.extend(tokenize(&ex.question).tokens);
        for s in &ex.context {
            out.extend(tokenize(s).tokens);
        }
    }
    out
}
