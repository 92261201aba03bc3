//! Dense `f64` building blocks with explicit backward passes.

mod adam;
mod checkpoint;
mod gradcheck;
mod gru;
mod ops;
mod tensor;

pub use adam::{adam_step, AdamState};
pub use checkpoint::Checkpoint;
pub use gradcheck::{grad_check, relative_error, GradCheckReport, Probe, FD_STEP};
pub use gru::{gru_step, GateCellCache, GateCellParams, GruCache, GruParams};
pub use ops::{
    bce_grad_logit, bce_loss, bce_loss_relative, sigmoid, softmax, softmax_backward, PROB_CLAMP,
};
pub use tensor::{axpy, check_len, check_shape, dot, matvec, matvec_t_acc, outer_acc, Tensor};

#[derive(Debug, thiserror::Error)]
pub enum NnError {
    #[error("shape mismatch in {context}: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        context: &'static str,
        expected: Vec<usize>,
        found: Vec<usize>,
    },
    #[error("empty input to {0}")]
    EmptyInput(&'static str),
    #[error("non-finite loss {0}")]
    NonFiniteLoss(f64),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed checkpoint at line {line}: {message}")]
    MalformedCheckpoint { line: usize, message: String },
}

/// A fixed, ordered collection of parameter tensors.
pub trait ParamSet {
    fn tensors(&self) -> Vec<&Tensor>;
    fn tensors_mut(&mut self) -> Vec<&mut Tensor>;
    /// Names parallel to [`ParamSet::tensors`].
    fn names(&self) -> Vec<&'static str>;

    fn num_params(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        for t in self.tensors() {
            out.extend_from_slice(t.data());
        }
        out
    }

    fn set_flat(&mut self, values: &[f64]) {
        let mut off = 0;
        for t in self.tensors_mut() {
            let n = t.len();
            t.data_mut().copy_from_slice(&values[off..off + n]);
            off += n;
        }
        assert_eq!(off, values.len(), "flat parameter length");
    }

    fn zero_out(&mut self) {
        for t in self.tensors_mut() {
            t.fill(0.0);
        }
    }
}
