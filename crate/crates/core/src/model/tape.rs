//! Cached forward pass and its hand-written reverse pass.

use super::reference::feature_vector;
use super::{ModelError, ModelParams, Norm, Variant};
use crate::datagen::Example;
use crate::embeddings::{tokenize, EmbeddingTable};
use crate::nn::{
    axpy, bce_grad_logit, bce_loss, bce_loss_relative, check_len, dot, grad_check, matvec_t_acc,
    outer_acc, sigmoid, softmax, softmax_backward, GateCellCache, GradCheckReport, GruCache,
    GruParams, ParamSet,
};
use crate::rng::Stream;

#[derive(Debug, Clone, Default)]
struct IterTape {
    s: Vec<f64>,
    /// `R × L` unifier steps.
    unify: Vec<Vec<GruCache>>,
    /// Unifier outputs.
    h: Vec<Vec<f64>>,
    feats: Vec<Vec<f64>>,
    /// Attention hidden layer after the optional tanh.
    act: Vec<Vec<f64>>,
    weights: Vec<f64>,
    scan: Vec<GateCellCache>,
}

/// Everything the backward pass needs from one forward evaluation.
#[derive(Debug, Clone, Default)]
pub struct Tape {
    /// Question tokens, or context-then-question tokens for the baseline.
    seq_tokens: Vec<String>,
    seq_x: Vec<Vec<f64>>,
    seq_steps: Vec<GruCache>,
    rule_tokens: Vec<Vec<String>>,
    rule_x: Vec<Vec<Vec<f64>>>,
    rule_steps: Vec<Vec<GruCache>>,
    rules: Vec<Vec<f64>>,
    /// Unifier input projections, computed once per token.
    uproj: Vec<Vec<Vec<f64>>>,
    iters: Vec<IterTape>,
    s_final: Vec<f64>,
    pub logit: f64,
    pub probability: f64,
}

impl Tape {
    pub fn attention_trace(&self) -> Vec<Vec<f64>> {
        self.iters.iter().map(|it| it.weights.clone()).collect()
    }

    /// Token order of the per-token gradients filled in by [`backward`]:
    /// the encoder's first sequence, then each context sentence.
    pub fn tokens(&self) -> Vec<&str> {
        self.seq_tokens
            .iter()
            .chain(self.rule_tokens.iter().flatten())
            .map(String::as_str)
            .collect()
    }
}

fn lookup(table: &EmbeddingTable, tokens: &[String]) -> Vec<Vec<f64>> {
    tokens.iter().map(|t| table.vector(t)).collect()
}

fn run_gru(p: &GruParams, xs: &[Vec<f64>], h0: Vec<f64>, steps: &mut Vec<GruCache>) -> Vec<f64> {
    let mut xp = vec![0.0; 3 * p.hidden];
    let mut h = h0;
    for x in xs {
        p.project(x, &mut xp);
        let mut cache = GruCache::default();
        p.step_projected(&xp, &h, &mut cache);
        h.clone_from(&cache.h_new);
        steps.push(cache);
    }
    h
}

/// Backward through a GRU run whose inputs are not projected elsewhere.
/// Returns the gradient w.r.t. the initial state.
fn gru_backward(
    p: &GruParams,
    xs: &[Vec<f64>],
    steps: &[GruCache],
    dh_final: &[f64],
    grads: &mut GruParams,
    mut dx: Option<&mut [Vec<f64>]>,
) -> Vec<f64> {
    let n = p.hidden;
    let mut dh = dh_final.to_vec();
    let mut dxp = vec![0.0; 3 * n];
    for l in (0..steps.len()).rev() {
        let mut dprev = vec![0.0; n];
        p.step_backward(&steps[l], &dh, grads, &mut dprev, &mut dxp);
        GruParams::accumulate_input_grads(grads, &dxp, &xs[l]);
        if let Some(dx) = dx.as_deref_mut() {
            p.input_grad(&dxp, &mut dx[l]);
        }
        dh = dprev;
    }
    dh
}

pub fn forward_tape(
    params: &ModelParams,
    table: &EmbeddingTable,
    example: &Example,
) -> Result<Tape, ModelError> {
    let cfg = &params.config;
    check_len("embedding width", cfg.embed, table.dimension())?;
    let d = cfg.hidden;
    let mut tape = Tape::default();
    let s_final = if cfg.variant == Variant::Baseline {
        let mut tokens = tokenize(&example.context.join(" ")).tokens;
        tokens.extend(tokenize(&example.question).tokens);
        tape.seq_x = lookup(table, &tokens);
        tape.seq_tokens = tokens;
        run_gru(
            &params.encoder,
            &tape.seq_x,
            vec![0.0; d],
            &mut tape.seq_steps,
        )
    } else {
        if example.context.is_empty() {
            return Err(ModelError::EmptyContext);
        }
        tape.seq_tokens = tokenize(&example.question).tokens;
        tape.seq_x = lookup(table, &tape.seq_tokens);
        let q = run_gru(
            &params.encoder,
            &tape.seq_x,
            vec![0.0; d],
            &mut tape.seq_steps,
        );
        for (i, sentence) in example.context.iter().enumerate() {
            let tokens = tokenize(sentence).tokens;
            if tokens.is_empty() {
                return Err(ModelError::AllMasked(i));
            }
            let xs = lookup(table, &tokens);
            let mut steps = Vec::with_capacity(xs.len());
            tape.rules
                .push(run_gru(&params.encoder, &xs, vec![0.0; d], &mut steps));
            tape.uproj.push(
                xs.iter()
                    .map(|x| {
                        let mut xp = vec![0.0; 3 * d];
                        params.unifier.project(x, &mut xp);
                        xp
                    })
                    .collect(),
            );
            tape.rule_steps.push(steps);
            tape.rule_x.push(xs);
            tape.rule_tokens.push(tokens);
        }
        let mut s = q.clone();
        for _ in 0..cfg.iterations {
            let (it, next) = iterate_tape(params, &q, &tape.rules, &tape.uproj, s)?;
            s = next;
            tape.iters.push(it);
        }
        s
    };
    tape.logit = dot(params.readout_w.data(), &s_final) + params.readout_b.data()[0];
    tape.probability = sigmoid(tape.logit);
    tape.s_final = s_final;
    Ok(tape)
}

fn iterate_tape(
    params: &ModelParams,
    q: &[f64],
    rules: &[Vec<f64>],
    uproj: &[Vec<Vec<f64>>],
    s: Vec<f64>,
) -> Result<(IterTape, Vec<f64>), ModelError> {
    let cfg = &params.config;
    let d = cfg.hidden;
    let r = rules.len();
    let mut it = IterTape {
        unify: Vec::with_capacity(r),
        h: Vec::with_capacity(r),
        feats: Vec::with_capacity(r),
        act: Vec::with_capacity(r),
        ..IterTape::default()
    };
    let mut scores = Vec::with_capacity(r);
    for (rule, proj) in rules.iter().zip(uproj) {
        let mut h = s.clone();
        let mut steps = Vec::with_capacity(proj.len());
        for xp in proj {
            let mut cache = GruCache::default();
            params.unifier.step_projected(xp, &h, &mut cache);
            h.clone_from(&cache.h_new);
            steps.push(cache);
        }
        it.unify.push(steps);
        it.h.push(h);
        let w = feature_vector(&s, q, rule)?;
        let mut a = vec![0.0; d];
        params.att_u.matvec(&w, &mut a);
        for (ak, bk) in a.iter_mut().zip(params.att_b1.data()) {
            *ak += bk;
            if cfg.attention_tanh {
                *ak = ak.tanh();
            }
        }
        scores.push(dot(params.att_w.data(), &a) + params.att_b2.data()[0]);
        it.feats.push(w);
        it.act.push(a);
    }
    it.weights = match cfg.norm() {
        Norm::Sigmoid => scores.iter().copied().map(sigmoid).collect(),
        Norm::Softmax => softmax(&scores)?,
    };
    let next = if cfg.uses_scan() {
        let mut h = s.clone();
        for (x, &g) in it.h.iter().zip(&it.weights) {
            let mut cache = GateCellCache::default();
            params.gate.step(x, &h, g, &mut cache);
            h.clone_from(&cache.h_new);
            it.scan.push(cache);
        }
        h
    } else {
        let mut next = vec![0.0; d];
        for (h, &a) in it.h.iter().zip(&it.weights) {
            axpy(a, h, &mut next);
        }
        next
    };
    it.s = s;
    Ok((it, next))
}

/// Accumulates `∂L/∂θ` into `grads` given `∂L/∂logit`. When `token_grads`
/// is given it receives `∂L/∂x` for every token, in [`Tape::tokens`] order.
pub fn backward(
    params: &ModelParams,
    tape: &Tape,
    dlogit: f64,
    grads: &mut ModelParams,
    token_grads: Option<&mut Vec<Vec<f64>>>,
) {
    let cfg = &params.config;
    let (d, e) = (cfg.hidden, cfg.embed);
    axpy(dlogit, &tape.s_final, grads.readout_w.data_mut());
    grads.readout_b.data_mut()[0] += dlogit;
    let mut ds: Vec<f64> = params.readout_w.data().iter().map(|w| w * dlogit).collect();

    let r = tape.rules.len();
    let mut dq = vec![0.0; d];
    let mut dr = vec![vec![0.0; d]; r];
    let mut duxp: Vec<Vec<Vec<f64>>> = tape
        .uproj
        .iter()
        .map(|p| vec![vec![0.0; 3 * d]; p.len()])
        .collect();
    let w_att = params.att_w.data();
    let mut scratch = vec![0.0; 3 * d];

    for it in tape.iters.iter().rev() {
        let mut ds_prev = vec![0.0; d];
        let mut dh = vec![vec![0.0; d]; r];
        let mut dweights = vec![0.0; r];
        if cfg.uses_scan() {
            let mut dcur = ds.clone();
            for i in (0..r).rev() {
                let mut dprev = vec![0.0; d];
                dweights[i] = params.gate.step_backward(
                    &it.scan[i],
                    &it.h[i],
                    &dcur,
                    &mut grads.gate,
                    &mut dprev,
                    &mut dh[i],
                );
                dcur = dprev;
            }
            axpy(1.0, &dcur, &mut ds_prev);
        } else {
            for i in 0..r {
                dweights[i] = dot(&ds, &it.h[i]);
                axpy(it.weights[i], &ds, &mut dh[i]);
            }
        }
        let dscores = match cfg.norm() {
            Norm::Sigmoid => dweights
                .iter()
                .zip(&it.weights)
                .map(|(g, a)| g * a * (1.0 - a))
                .collect(),
            Norm::Softmax => softmax_backward(&it.weights, &dweights),
        };
        let s = &it.s;
        let mut dfeat = vec![0.0; 5 * d];
        let mut da = vec![0.0; d];
        for i in 0..r {
            let g = dscores[i];
            axpy(g, &it.act[i], grads.att_w.data_mut());
            grads.att_b2.data_mut()[0] += g;
            for k in 0..d {
                let a = it.act[i][k];
                da[k] = g * w_att[k] * if cfg.attention_tanh { 1.0 - a * a } else { 1.0 };
            }
            outer_acc(grads.att_u.data_mut(), &da, &it.feats[i]);
            axpy(1.0, &da, grads.att_b1.data_mut());
            dfeat.fill(0.0);
            matvec_t_acc(params.att_u.data(), d, 5 * d, &da, &mut dfeat);
            let ri = &tape.rules[i];
            for k in 0..d {
                let diff = s[k] - ri[k];
                let sq = 2.0 * diff * dfeat[3 * d + k];
                ds_prev[k] += dfeat[k] + sq + ri[k] * dfeat[4 * d + k];
                dq[k] += dfeat[d + k];
                dr[i][k] += dfeat[2 * d + k] - sq + s[k] * dfeat[4 * d + k];
            }
            let mut dcur = std::mem::take(&mut dh[i]);
            for l in (0..it.unify[i].len()).rev() {
                let mut dprev = vec![0.0; d];
                params.unifier.step_backward(
                    &it.unify[i][l],
                    &dcur,
                    &mut grads.unifier,
                    &mut dprev,
                    &mut scratch,
                );
                axpy(1.0, &scratch, &mut duxp[i][l]);
                dcur = dprev;
            }
            axpy(1.0, &dcur, &mut ds_prev);
        }
        ds = ds_prev;
    }
    // s⁰ = q; for the baseline `ds` is the gradient of the sequence state
    axpy(1.0, &ds, &mut dq);

    let mut tg = token_grads.map(|tg| {
        tg.clear();
        tg.extend((0..tape.tokens().len()).map(|_| vec![0.0; e]));
        tg
    });
    let nseq = tape.seq_x.len();
    gru_backward(
        &params.encoder,
        &tape.seq_x,
        &tape.seq_steps,
        &dq,
        &mut grads.encoder,
        tg.as_deref_mut().map(|v| &mut v[..nseq]),
    );
    let mut offset = nseq;
    for i in 0..r {
        let len = tape.rule_x[i].len();
        let mut dx = tg.as_deref_mut().map(|v| &mut v[offset..offset + len]);
        gru_backward(
            &params.encoder,
            &tape.rule_x[i],
            &tape.rule_steps[i],
            &dr[i],
            &mut grads.encoder,
            dx.as_deref_mut(),
        );
        for l in 0..len {
            GruParams::accumulate_input_grads(&mut grads.unifier, &duxp[i][l], &tape.rule_x[i][l]);
            if let Some(dx) = dx.as_deref_mut() {
                params.unifier.input_grad(&duxp[i][l], &mut dx[l]);
            }
        }
        offset += len;
    }
}

/// BCE loss of one example; adds its parameter gradient into `grads`.
/// Returns `(loss, probability)`.
pub fn loss_and_grad(
    params: &ModelParams,
    table: &EmbeddingTable,
    example: &Example,
    grads: &mut ModelParams,
    token_grads: Option<&mut Vec<Vec<f64>>>,
) -> Result<(f64, f64), ModelError> {
    let tape = forward_tape(params, table, example)?;
    let p = tape.probability;
    backward(
        params,
        &tape,
        bce_grad_logit(p, example.label),
        grads,
        token_grads,
    );
    Ok((bce_loss(p, example.label), p))
}

/// Index of every scalar the variant's output depends on, in
/// [`ParamSet::flatten`] order.
pub fn active_indices(params: &ModelParams) -> Vec<usize> {
    let mut idx = Vec::new();
    let mut off = 0;
    for (t, on) in params.tensors().iter().zip(params.active_mask()) {
        if on {
            idx.extend(off..off + t.len());
        }
        off += t.len();
    }
    idx
}

/// Compares the analytic gradient of the BCE loss on `example` with central
/// differences on `probes` random active parameters (all of them if
/// `probes` is larger). The probed objective is the loss minus its value at
/// `params`, see [`bce_loss_relative`].
pub fn check_gradients(
    params: &ModelParams,
    table: &EmbeddingTable,
    example: &Example,
    probes: usize,
    rng: &mut Stream,
) -> Result<GradCheckReport, ModelError> {
    let mut grads = params.zeros_like();
    let tape = forward_tape(params, table, example)?;
    let dlogit = bce_grad_logit(tape.probability, example.label);
    backward(params, &tape, dlogit, &mut grads, None);
    let active = active_indices(params);
    let full = params.flatten();
    let g = grads.flatten();
    let point: Vec<f64> = active.iter().map(|&i| full[i]).collect();
    let analytic: Vec<f64> = active.iter().map(|&i| g[i]).collect();
    let mut probe = params.clone();
    let mut failure = None;
    let loss = |x: &[f64]| {
        let mut flat = full.clone();
        for (&i, &v) in active.iter().zip(x) {
            flat[i] = v;
        }
        probe.set_flat(&flat);
        match forward_tape(&probe, table, example) {
            Ok(t) => bce_loss_relative(t.logit, tape.logit, example.label),
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        }
    };
    let report = grad_check(loss, &point, &analytic, probes, rng);
    if let Some(e) = failure {
        return Err(e);
    }
    let mut report = report?;
    for p in &mut report.probes {
        p.index = active[p.index];
    }
    Ok(report)
}

/// Three five-word sentences and a question: the small example used by
/// [`check_variant`].
pub fn gradient_fixture() -> Example {
    Example {
        id: "grad-check".into(),
        context: vec![
            "Anne is rough and big.".into(),
            "Big rough people are young.".into(),
            "Young people are not cold.".into(),
        ],
        question: "Anne is not cold.".into(),
        label: true,
        depth: 2,
    }
}

/// Hidden size used by [`check_variant`].
pub const GRAD_CHECK_HIDDEN: usize = 8;

/// Gradient check of one variant at hidden size 8 on [`gradient_fixture`],
/// with every parameter (biases included) jittered away from its
/// initial value.
pub fn check_variant(
    variant: Variant,
    probes: usize,
    seed: u64,
) -> Result<GradCheckReport, ModelError> {
    let table = EmbeddingTable::bundled();
    let config = super::ModelConfig {
        hidden: GRAD_CHECK_HIDDEN,
        embed: table.dimension(),
        ..super::ModelConfig::with_variant(variant)
    };
    let root = Stream::new(seed);
    let mut params = ModelParams::init(config, root.split(1).next_u64());
    let mut jitter = root.split(2);
    for t in params.tensors_mut() {
        for v in t.data_mut() {
            *v += jitter.uniform(-0.1, 0.1);
        }
    }
    check_gradients(
        &params,
        &table,
        &gradient_fixture(),
        probes,
        &mut root.split(3),
    )
}
