//! The model one operation at a time, without caching.
//!
//! These functions favour clarity over speed; [`super::tape`] must agree
//! with them to rounding error.

use super::{ModelError, ModelParams, Norm, Variant};
use crate::datagen::Example;
use crate::embeddings::{tokenize, EmbeddingTable};
use crate::nn::{check_len, dot, gru_step, sigmoid, softmax, GateCellCache, NnError, Tensor};

/// Encoder outputs plus the padded word embeddings the unifier reads.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedExample {
    /// Question encoding, also the initial state.
    pub q: Vec<f64>,
    /// One encoding per context sentence.
    pub rules: Vec<Vec<f64>>,
    /// `R × L × embed`, zero rows where masked.
    pub c: Tensor,
    /// `R × L`, true where a real token sits.
    pub mask: Vec<Vec<bool>>,
}

impl EncodedExample {
    pub fn num_rules(&self) -> usize {
        self.rules.len()
    }

    /// Padded `L × embed` block of sentence `i`, flattened.
    pub fn sentence(&self, i: usize) -> &[f64] {
        self.c.row(i)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationState {
    pub s: Vec<f64>,
    pub t: usize,
    /// Normalised attention weights, one vector per completed iteration.
    pub attention_trace: Vec<Vec<f64>>,
}

impl IterationState {
    pub fn initial(enc: &EncodedExample) -> Self {
        Self {
            s: enc.q.clone(),
            t: 0,
            attention_trace: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub probability: f64,
    pub logit: f64,
    /// Empty for the baseline.
    pub attention_trace: Vec<Vec<f64>>,
}

fn check_table(params: &ModelParams, table: &EmbeddingTable) -> Result<(), NnError> {
    check_len("embedding width", params.config.embed, table.dimension())
}

/// Word embeddings of each sentence, `L_i × embed`.
pub fn embed_sentences(table: &EmbeddingTable, sentences: &[String]) -> Vec<Tensor> {
    sentences
        .iter()
        .map(|s| table.embed(&tokenize(s)))
        .collect()
}

fn fold(p: &crate::nn::GruParams, rows: &Tensor, h0: Vec<f64>) -> Result<Vec<f64>, NnError> {
    (0..rows.rows()).try_fold(h0, |h, l| gru_step(p, rows.row(l), &h))
}

pub fn encode(
    table: &EmbeddingTable,
    params: &ModelParams,
    example: &Example,
) -> Result<EncodedExample, ModelError> {
    check_table(params, table)?;
    if example.context.is_empty() {
        return Err(ModelError::EmptyContext);
    }
    let (d, e) = (params.config.hidden, params.config.embed);
    let sentences = embed_sentences(table, &example.context);
    if let Some(i) = sentences.iter().position(|m| m.rows() == 0) {
        return Err(ModelError::AllMasked(i));
    }
    let question = table.embed(&tokenize(&example.question));
    let q = fold(&params.encoder, &question, vec![0.0; d])?;
    let rules = sentences
        .iter()
        .map(|m| fold(&params.encoder, m, vec![0.0; d]))
        .collect::<Result<Vec<_>, _>>()?;
    let len = sentences.iter().map(Tensor::rows).max().unwrap_or(0);
    let mut c = Tensor::zeros(&[sentences.len(), len, e]);
    let mut mask = Vec::with_capacity(sentences.len());
    for (i, m) in sentences.iter().enumerate() {
        let start = i * len * e;
        c.data_mut()[start..start + m.len()].copy_from_slice(m.data());
        mask.push((0..len).map(|l| l < m.rows()).collect());
    }
    Ok(EncodedExample { q, rules, c, mask })
}

/// `[s; q; r; (s − r)²; s ⊙ r]`
pub fn feature_vector(s: &[f64], q: &[f64], r: &[f64]) -> Result<Vec<f64>, NnError> {
    check_len("feature q", s.len(), q.len())?;
    check_len("feature r", s.len(), r.len())?;
    let mut w = Vec::with_capacity(5 * s.len());
    w.extend_from_slice(s);
    w.extend_from_slice(q);
    w.extend_from_slice(r);
    w.extend(s.iter().zip(r).map(|(a, b)| (a - b) * (a - b)));
    w.extend(s.iter().zip(r).map(|(a, b)| a * b));
    Ok(w)
}

/// Raw score `W·act(U w + b₁) + b₂` for one feature vector.
pub fn attention_score(params: &ModelParams, w: &[f64]) -> f64 {
    let d = params.config.hidden;
    let mut a = vec![0.0; d];
    params.att_u.matvec(w, &mut a);
    for (ak, bk) in a.iter_mut().zip(params.att_b1.data()) {
        *ak += bk;
        if params.config.attention_tanh {
            *ak = ak.tanh();
        }
    }
    dot(params.att_w.data(), &a) + params.att_b2.data()[0]
}

/// Normalised attention weights over the rules.
pub fn attention(
    params: &ModelParams,
    s: &[f64],
    q: &[f64],
    rules: &[Vec<f64>],
) -> Result<Vec<f64>, ModelError> {
    if rules.is_empty() {
        return Err(NnError::EmptyInput("attention").into());
    }
    check_len("attention state", params.config.hidden, s.len())?;
    let scores = rules
        .iter()
        .map(|r| Ok(attention_score(params, &feature_vector(s, q, r)?)))
        .collect::<Result<Vec<f64>, NnError>>()?;
    Ok(match params.config.norm() {
        Norm::Sigmoid => scores.into_iter().map(sigmoid).collect(),
        Norm::Softmax => softmax(&scores)?,
    })
}

/// Folds the unifier GRU over the unmasked rows of `c_i` starting from `s`.
pub fn unifier(
    params: &ModelParams,
    c_i: &[f64],
    mask: &[bool],
    s: &[f64],
) -> Result<Vec<f64>, ModelError> {
    let e = params.config.embed;
    check_len("unifier block", mask.len() * e, c_i.len())?;
    if !mask.iter().any(|&m| m) {
        return Err(ModelError::AllMasked(0));
    }
    let mut h = s.to_vec();
    for (row, _) in c_i.chunks_exact(e).zip(mask).filter(|(_, &m)| m) {
        h = gru_step(&params.unifier, row, &h)?;
    }
    Ok(h)
}

/// One state update.
pub fn iterate(
    params: &ModelParams,
    enc: &EncodedExample,
    state: &IterationState,
) -> Result<IterationState, ModelError> {
    let max = params.config.iterations;
    if state.t >= max {
        return Err(ModelError::IterationOverflow { t: state.t, max });
    }
    let outputs = (0..enc.num_rules())
        .map(|i| {
            unifier(params, enc.sentence(i), &enc.mask[i], &state.s).map_err(|e| match e {
                ModelError::AllMasked(_) => ModelError::AllMasked(i),
                other => other,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let weights = attention(params, &state.s, &enc.q, &enc.rules)?;
    let s = if params.config.uses_scan() {
        let mut h = state.s.clone();
        let mut cache = GateCellCache::default();
        for (x, &g) in outputs.iter().zip(&weights) {
            params.gate.step(x, &h, g, &mut cache);
            h.clone_from(&cache.h_new);
        }
        h
    } else {
        let mut s = vec![0.0; state.s.len()];
        for (h, &a) in outputs.iter().zip(&weights) {
            crate::nn::axpy(a, h, &mut s);
        }
        s
    };
    let mut attention_trace = state.attention_trace.clone();
    attention_trace.push(weights);
    Ok(IterationState {
        s,
        t: state.t + 1,
        attention_trace,
    })
}

fn readout(params: &ModelParams, s: &[f64]) -> (f64, f64) {
    let logit = dot(params.readout_w.data(), s) + params.readout_b.data()[0];
    (logit, sigmoid(logit))
}

/// Probability that the question holds. Dispatches to
/// [`baseline_forward`] for [`Variant::Baseline`].
pub fn forward(
    params: &ModelParams,
    table: &EmbeddingTable,
    example: &Example,
) -> Result<Prediction, ModelError> {
    if params.config.variant == Variant::Baseline {
        let (logit, probability) = baseline_logit(params, table, example)?;
        return Ok(Prediction {
            probability,
            logit,
            attention_trace: Vec::new(),
        });
    }
    let enc = encode(table, params, example)?;
    let mut state = IterationState::initial(&enc);
    while state.t < params.config.iterations {
        state = iterate(params, &enc, &state)?;
    }
    let (logit, probability) = readout(params, &state.s);
    Ok(Prediction {
        probability,
        logit,
        attention_trace: state.attention_trace,
    })
}

fn baseline_logit(
    params: &ModelParams,
    table: &EmbeddingTable,
    example: &Example,
) -> Result<(f64, f64), ModelError> {
    check_table(params, table)?;
    let mut tokens = tokenize(&example.context.join(" "));
    tokens.tokens.extend(tokenize(&example.question).tokens);
    let h = fold(
        &params.encoder,
        &table.embed(&tokens),
        vec![0.0; params.config.hidden],
    )?;
    Ok(readout(params, &h))
}

/// Plain recurrent baseline: one encoder pass over all context tokens then
/// the question tokens, followed by the readout.
pub fn baseline_forward(
    params: &ModelParams,
    table: &EmbeddingTable,
    example: &Example,
) -> Result<f64, ModelError> {
    Ok(baseline_logit(params, table, example)?.1)
}
