//! Gated recurrent units with hand-written backward passes.
//!
//! ```text
//! z  = σ(W_z x + U_z h + b_z)
//! r  = σ(W_r x + U_r h + b_r)
//! h̃  = tanh(W_h x + U_h (r ∘ h) + b_h)
//! h' = (1 − z) ∘ h + z ∘ h̃
//! ```
//!
//! Input projections `W_* x` are split out ([`GruParams::project`]) so a
//! caller that feeds the same frozen input many times can compute them once.

use super::ops::sigmoid;
use super::tensor::{axpy, check_len, matvec, matvec_t_acc, outer_acc, Tensor};
use super::{NnError, ParamSet};
use crate::rng::Stream;

fn uniform(shape: &[usize], fan_in: usize, rng: &mut Stream) -> Tensor {
    let bound = (1.0 / fan_in as f64).sqrt();
    let n = shape.iter().product();
    Tensor::from_vec(
        shape.to_vec(),
        (0..n).map(|_| rng.uniform(-bound, bound)).collect(),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct GruParams {
    pub input: usize,
    pub hidden: usize,
    pub w_z: Tensor,
    pub w_r: Tensor,
    pub w_h: Tensor,
    pub u_z: Tensor,
    pub u_r: Tensor,
    pub u_h: Tensor,
    pub b_z: Tensor,
    pub b_r: Tensor,
    pub b_h: Tensor,
}

/// Forward values of one step kept for the backward pass.
#[derive(Debug, Clone, Default)]
pub struct GruCache {
    pub h_prev: Vec<f64>,
    pub z: Vec<f64>,
    pub r: Vec<f64>,
    pub cand: Vec<f64>,
    pub rh: Vec<f64>,
    pub h_new: Vec<f64>,
}

impl GruParams {
    pub fn zeros(input: usize, hidden: usize) -> Self {
        let w = || Tensor::zeros(&[hidden, input]);
        let u = || Tensor::zeros(&[hidden, hidden]);
        let b = || Tensor::zeros(&[hidden]);
        Self {
            input,
            hidden,
            w_z: w(),
            w_r: w(),
            w_h: w(),
            u_z: u(),
            u_r: u(),
            u_h: u(),
            b_z: b(),
            b_r: b(),
            b_h: b(),
        }
    }

    /// Weights uniform in ±sqrt(1/fan_in), biases zero.
    pub fn init(input: usize, hidden: usize, rng: &mut Stream) -> Self {
        let mut p = Self::zeros(input, hidden);
        p.w_z = uniform(&[hidden, input], input, rng);
        p.w_r = uniform(&[hidden, input], input, rng);
        p.w_h = uniform(&[hidden, input], input, rng);
        p.u_z = uniform(&[hidden, hidden], hidden, rng);
        p.u_r = uniform(&[hidden, hidden], hidden, rng);
        p.u_h = uniform(&[hidden, hidden], hidden, rng);
        p
    }

    /// `[W_z x; W_r x; W_h x]`, length `3 * hidden`.
    pub fn project(&self, x: &[f64], out: &mut [f64]) {
        let (h, i) = (self.hidden, self.input);
        matvec(self.w_z.data(), h, i, x, &mut out[..h]);
        matvec(self.w_r.data(), h, i, x, &mut out[h..2 * h]);
        matvec(self.w_h.data(), h, i, x, &mut out[2 * h..3 * h]);
    }

    /// One step from a precomputed input projection.
    pub fn step_projected(&self, xp: &[f64], h_prev: &[f64], cache: &mut GruCache) {
        let n = self.hidden;
        cache.h_prev.clear();
        cache.h_prev.extend_from_slice(h_prev);
        for v in [
            &mut cache.z,
            &mut cache.r,
            &mut cache.cand,
            &mut cache.rh,
            &mut cache.h_new,
        ] {
            v.resize(n, 0.0);
        }
        matvec(self.u_z.data(), n, n, h_prev, &mut cache.z);
        matvec(self.u_r.data(), n, n, h_prev, &mut cache.r);
        let (bz, br, bh) = (self.b_z.data(), self.b_r.data(), self.b_h.data());
        for k in 0..n {
            cache.z[k] = sigmoid(cache.z[k] + xp[k] + bz[k]);
            cache.r[k] = sigmoid(cache.r[k] + xp[n + k] + br[k]);
            cache.rh[k] = cache.r[k] * h_prev[k];
        }
        matvec(self.u_h.data(), n, n, &cache.rh, &mut cache.cand);
        for k in 0..n {
            cache.cand[k] = (cache.cand[k] + xp[2 * n + k] + bh[k]).tanh();
            cache.h_new[k] = (1.0 - cache.z[k]) * h_prev[k] + cache.z[k] * cache.cand[k];
        }
    }

    /// Backward through one step. Accumulates recurrent-weight and bias
    /// gradients into `grads`, adds `∂/∂h_prev` into `dh_prev`, and writes
    /// the gradient w.r.t. the input projection into `dxp` (length `3 * hidden`).
    pub fn step_backward(
        &self,
        cache: &GruCache,
        dh_new: &[f64],
        grads: &mut GruParams,
        dh_prev: &mut [f64],
        dxp: &mut [f64],
    ) {
        let n = self.hidden;
        let (daz, rest) = dxp.split_at_mut(n);
        let (dar, dah) = rest.split_at_mut(n);
        for k in 0..n {
            let g = dh_new[k];
            let z = cache.z[k];
            let c = cache.cand[k];
            daz[k] = g * (c - cache.h_prev[k]) * z * (1.0 - z);
            dah[k] = g * z * (1.0 - c * c);
            dh_prev[k] += g * (1.0 - z);
        }
        let mut drh = vec![0.0; n];
        matvec_t_acc(self.u_h.data(), n, n, dah, &mut drh);
        for k in 0..n {
            let r = cache.r[k];
            dar[k] = drh[k] * cache.h_prev[k] * r * (1.0 - r);
            dh_prev[k] += drh[k] * r;
        }
        matvec_t_acc(self.u_z.data(), n, n, daz, dh_prev);
        matvec_t_acc(self.u_r.data(), n, n, dar, dh_prev);
        outer_acc(grads.u_z.data_mut(), daz, &cache.h_prev);
        outer_acc(grads.u_r.data_mut(), dar, &cache.h_prev);
        outer_acc(grads.u_h.data_mut(), dah, &cache.rh);
        axpy(1.0, daz, grads.b_z.data_mut());
        axpy(1.0, dar, grads.b_r.data_mut());
        axpy(1.0, dah, grads.b_h.data_mut());
    }

    /// `grads.W_* += dxp_* xᵀ`
    pub fn accumulate_input_grads(grads: &mut GruParams, dxp: &[f64], x: &[f64]) {
        let n = grads.hidden;
        outer_acc(grads.w_z.data_mut(), &dxp[..n], x);
        outer_acc(grads.w_r.data_mut(), &dxp[n..2 * n], x);
        outer_acc(grads.w_h.data_mut(), &dxp[2 * n..], x);
    }

    /// `dx += Σ W_*ᵀ dxp_*`
    pub fn input_grad(&self, dxp: &[f64], dx: &mut [f64]) {
        let (n, i) = (self.hidden, self.input);
        matvec_t_acc(self.w_z.data(), n, i, &dxp[..n], dx);
        matvec_t_acc(self.w_r.data(), n, i, &dxp[n..2 * n], dx);
        matvec_t_acc(self.w_h.data(), n, i, &dxp[2 * n..], dx);
    }
}

impl ParamSet for GruParams {
    fn tensors(&self) -> Vec<&Tensor> {
        vec![
            &self.w_z, &self.w_r, &self.w_h, &self.u_z, &self.u_r, &self.u_h, &self.b_z, &self.b_r,
            &self.b_h,
        ]
    }

    fn tensors_mut(&mut self) -> Vec<&mut Tensor> {
        vec![
            &mut self.w_z,
            &mut self.w_r,
            &mut self.w_h,
            &mut self.u_z,
            &mut self.u_r,
            &mut self.u_h,
            &mut self.b_z,
            &mut self.b_r,
            &mut self.b_h,
        ]
    }

    fn names(&self) -> Vec<&'static str> {
        vec![
            "w_z", "w_r", "w_h", "u_z", "u_r", "u_h", "b_z", "b_r", "b_h",
        ]
    }
}

/// One GRU step: returns the new hidden state.
pub fn gru_step(p: &GruParams, x: &[f64], h: &[f64]) -> Result<Vec<f64>, NnError> {
    check_len("gru_step input", p.input, x.len())?;
    check_len("gru_step hidden", p.hidden, h.len())?;
    let mut xp = vec![0.0; 3 * p.hidden];
    p.project(x, &mut xp);
    let mut cache = GruCache::default();
    p.step_projected(&xp, h, &mut cache);
    Ok(cache.h_new)
}

/// GRU whose update gate is an externally supplied scalar:
/// `h' = g h̃ + (1 − g) h`, with the reset gate and candidate as above.
#[derive(Debug, Clone, PartialEq)]
pub struct GateCellParams {
    pub input: usize,
    pub hidden: usize,
    pub w_r: Tensor,
    pub w_h: Tensor,
    pub u_r: Tensor,
    pub u_h: Tensor,
    pub b_r: Tensor,
    pub b_h: Tensor,
}

#[derive(Debug, Clone, Default)]
pub struct GateCellCache {
    pub h_prev: Vec<f64>,
    pub r: Vec<f64>,
    pub cand: Vec<f64>,
    pub rh: Vec<f64>,
    pub gate: f64,
    pub h_new: Vec<f64>,
}

impl GateCellParams {
    pub fn zeros(input: usize, hidden: usize) -> Self {
        Self {
            input,
            hidden,
            w_r: Tensor::zeros(&[hidden, input]),
            w_h: Tensor::zeros(&[hidden, input]),
            u_r: Tensor::zeros(&[hidden, hidden]),
            u_h: Tensor::zeros(&[hidden, hidden]),
            b_r: Tensor::zeros(&[hidden]),
            b_h: Tensor::zeros(&[hidden]),
        }
    }

    pub fn init(input: usize, hidden: usize, rng: &mut Stream) -> Self {
        let mut p = Self::zeros(input, hidden);
        p.w_r = uniform(&[hidden, input], input, rng);
        p.w_h = uniform(&[hidden, input], input, rng);
        p.u_r = uniform(&[hidden, hidden], hidden, rng);
        p.u_h = uniform(&[hidden, hidden], hidden, rng);
        p
    }

    pub fn step(&self, x: &[f64], h_prev: &[f64], gate: f64, cache: &mut GateCellCache) {
        let (n, i) = (self.hidden, self.input);
        cache.h_prev.clear();
        cache.h_prev.extend_from_slice(h_prev);
        cache.gate = gate;
        for v in [
            &mut cache.r,
            &mut cache.cand,
            &mut cache.rh,
            &mut cache.h_new,
        ] {
            v.resize(n, 0.0);
        }
        let mut tmp = vec![0.0; n];
        matvec(self.w_r.data(), n, i, x, &mut cache.r);
        matvec(self.u_r.data(), n, n, h_prev, &mut tmp);
        let br = self.b_r.data();
        for k in 0..n {
            cache.r[k] = sigmoid(cache.r[k] + tmp[k] + br[k]);
            cache.rh[k] = cache.r[k] * h_prev[k];
        }
        matvec(self.w_h.data(), n, i, x, &mut cache.cand);
        matvec(self.u_h.data(), n, n, &cache.rh, &mut tmp);
        let bh = self.b_h.data();
        for k in 0..n {
            cache.cand[k] = (cache.cand[k] + tmp[k] + bh[k]).tanh();
            cache.h_new[k] = gate * cache.cand[k] + (1.0 - gate) * h_prev[k];
        }
    }

    /// Backward through one step; returns `∂L/∂gate`.
    pub fn step_backward(
        &self,
        cache: &GateCellCache,
        x: &[f64],
        dh_new: &[f64],
        grads: &mut GateCellParams,
        dh_prev: &mut [f64],
        dx: &mut [f64],
    ) -> f64 {
        let (n, i) = (self.hidden, self.input);
        let g = cache.gate;
        let mut dgate = 0.0;
        let mut dah = vec![0.0; n];
        for k in 0..n {
            let c = cache.cand[k];
            dgate += dh_new[k] * (c - cache.h_prev[k]);
            dah[k] = dh_new[k] * g * (1.0 - c * c);
            dh_prev[k] += dh_new[k] * (1.0 - g);
        }
        let mut drh = vec![0.0; n];
        matvec_t_acc(self.u_h.data(), n, n, &dah, &mut drh);
        let mut dar = vec![0.0; n];
        for k in 0..n {
            let r = cache.r[k];
            dar[k] = drh[k] * cache.h_prev[k] * r * (1.0 - r);
            dh_prev[k] += drh[k] * r;
        }
        matvec_t_acc(self.u_r.data(), n, n, &dar, dh_prev);
        matvec_t_acc(self.w_r.data(), n, i, &dar, dx);
        matvec_t_acc(self.w_h.data(), n, i, &dah, dx);
        outer_acc(grads.w_r.data_mut(), &dar, x);
        outer_acc(grads.w_h.data_mut(), &dah, x);
        outer_acc(grads.u_r.data_mut(), &dar, &cache.h_prev);
        outer_acc(grads.u_h.data_mut(), &dah, &cache.rh);
        axpy(1.0, &dar, grads.b_r.data_mut());
        axpy(1.0, &dah, grads.b_h.data_mut());
        dgate
    }
}

impl ParamSet for GateCellParams {
    fn tensors(&self) -> Vec<&Tensor> {
        vec![
            &self.w_r, &self.w_h, &self.u_r, &self.u_h, &self.b_r, &self.b_h,
        ]
    }

    fn tensors_mut(&mut self) -> Vec<&mut Tensor> {
        vec![
            &mut self.w_r,
            &mut self.w_h,
            &mut self.u_r,
            &mut self.u_h,
            &mut self.b_r,
            &mut self.b_h,
        ]
    }

    fn names(&self) -> Vec<&'static str> {
        vec!["w_r", "w_h", "u_r", "u_h", "b_r", "b_h"]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_sigmoid(x: f64) -> f64 {
        1.0 / (1.0 + (-x).exp())
    }

    /// Element-by-element evaluation written independently of the kernels.
    fn reference_step(p: &GruParams, x: &[f64], h: &[f64]) -> Vec<f64> {
        let n = p.hidden;
        let m = p.input;
        let at = |t: &Tensor, i: usize, j: usize, cols: usize| t.data()[i * cols + j];
        let mut z = vec![0.0; n];
        let mut r = vec![0.0; n];
        for i in 0..n {
            let mut sz = p.b_z.data()[i];
            let mut sr = p.b_r.data()[i];
            for j in 0..m {
                sz += at(&p.w_z, i, j, m) * x[j];
                sr += at(&p.w_r, i, j, m) * x[j];
            }
            for j in 0..n {
                sz += at(&p.u_z, i, j, n) * h[j];
                sr += at(&p.u_r, i, j, n) * h[j];
            }
            z[i] = scalar_sigmoid(sz);
            r[i] = scalar_sigmoid(sr);
        }
        (0..n)
            .map(|i| {
                let mut s = p.b_h.data()[i];
                for j in 0..m {
                    s += at(&p.w_h, i, j, m) * x[j];
                }
                for j in 0..n {
                    s += at(&p.u_h, i, j, n) * r[j] * h[j];
                }
                (1.0 - z[i]) * h[i] + z[i] * s.tanh()
            })
            .collect()
    }

    #[test]
    fn zero_params_zero_state() {
        let p = GruParams::zeros(3, 2);
        assert_eq!(
            gru_step(&p, &[1.0, 2.0, 3.0], &[0.0, 0.0]).unwrap(),
            vec![0.0, 0.0]
        );
    }

    #[test]
    fn zero_weights_halve_state() {
        let p = GruParams::zeros(3, 2);
        let out = gru_step(&p, &[0.0; 3], &[0.8, -0.4]).unwrap();
        assert_eq!(out, vec![0.4, -0.2]);
    }

    #[test]
    fn matches_scalar_reference() {
        let mut rng = Stream::new(11);
        let mut p = GruParams::init(2, 2, &mut rng);
        for b in [&mut p.b_z, &mut p.b_r, &mut p.b_h] {
            b.data_mut()
                .iter_mut()
                .for_each(|v| *v = rng.uniform(-0.5, 0.5));
        }
        let x = [0.3, -1.2];
        let h = [0.5, -0.25];
        let got = gru_step(&p, &x, &h).unwrap();
        let want = reference_step(&p, &x, &h);
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() < 1e-14, "{a} vs {b}");
        }
    }

    #[test]
    fn shape_errors() {
        let p = GruParams::zeros(3, 2);
        assert!(matches!(
            gru_step(&p, &[0.0; 2], &[0.0; 2]),
            Err(NnError::ShapeMismatch { .. })
        ));
        assert!(gru_step(&p, &[0.0; 3], &[0.0; 3]).is_err());
    }

    #[test]
    fn gate_cell_zero_gate_keeps_state() {
        let mut rng = Stream::new(3);
        let p = GateCellParams::init(4, 3, &mut rng);
        let mut c = GateCellCache::default();
        let h = [0.1, -0.7, 0.3];
        p.step(&[1.0, 2.0, -1.0, 0.5], &h, 0.0, &mut c);
        assert_eq!(c.h_new, h);
    }
}
