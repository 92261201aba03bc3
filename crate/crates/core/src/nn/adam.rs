//! Bias-corrected Adam.

use super::tensor::{check_shape, Tensor};
use super::NnError;

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<Tensor>,
    pub v: Vec<Tensor>,
    pub step_count: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub learning_rate: f64,
}

impl AdamState {
    /// Fresh moments shaped like `params`, with β1 = 0.9, β2 = 0.999, ε = 1e-8.
    pub fn new(params: &[&Tensor], learning_rate: f64) -> Self {
        let zeros: Vec<Tensor> = params.iter().map(|t| Tensor::zeros_like(t)).collect();
        Self {
            m: zeros.clone(),
            v: zeros,
            step_count: 0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            learning_rate,
        }
    }
}

/// Applies one update in place:
/// `m ← β1 m + (1−β1) g`, `v ← β2 v + (1−β2) g²`,
/// `θ ← θ − lr · m̂ / (√v̂ + ε)` with `m̂ = m / (1−β1ᵗ)`, `v̂ = v / (1−β2ᵗ)`.
pub fn adam_step(
    state: &mut AdamState,
    mut params: Vec<&mut Tensor>,
    grads: &[&Tensor],
) -> Result<(), NnError> {
    if params.len() != grads.len() || params.len() != state.m.len() {
        return Err(NnError::ShapeMismatch {
            context: "adam_step tensor count",
            expected: vec![state.m.len()],
            found: vec![params.len(), grads.len()],
        });
    }
    for ((p, g), m) in params.iter().zip(grads).zip(&state.m) {
        check_shape("adam_step param", m.shape(), p.shape())?;
        check_shape("adam_step grad", m.shape(), g.shape())?;
    }
    state.step_count += 1;
    let t = state.step_count as i32;
    let (b1, b2, eps, lr) = (state.beta1, state.beta2, state.epsilon, state.learning_rate);
    let c1 = 1.0 - b1.powi(t);
    let c2 = 1.0 - b2.powi(t);
    for (((p, g), m), v) in params
        .iter_mut()
        .zip(grads)
        .zip(state.m.iter_mut())
        .zip(state.v.iter_mut())
    {
        let pd = p.data_mut();
        let gd = g.data();
        let md = m.data_mut();
        let vd = v.data_mut();
        for k in 0..pd.len() {
            md[k] = b1 * md[k] + (1.0 - b1) * gd[k];
            vd[k] = b2 * vd[k] + (1.0 - b2) * gd[k] * gd[k];
            let mhat = md[k] / c1;
            let vhat = vd[k] / c2;
            pd[k] -= lr * mhat / (vhat.sqrt() + eps);
        }
    }
    Ok(())
}
