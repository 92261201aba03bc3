use super::{GaCombine, ModelConfig, ModelError, Norm, Variant};
use crate::nn::{Checkpoint, GateCellParams, GruParams, NnError, ParamSet, Tensor};
use crate::rng::Stream;

/// Every trainable tensor of the model. Variants that do not use a block
/// (e.g. the baseline and the attention layers) still carry it; its
/// gradient is then always zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub config: ModelConfig,
    pub encoder: GruParams,
    pub unifier: GruParams,
    /// `d × 5d`
    pub att_u: Tensor,
    pub att_b1: Tensor,
    /// `d`
    pub att_w: Tensor,
    pub att_b2: Tensor,
    pub gate: GateCellParams,
    pub readout_w: Tensor,
    pub readout_b: Tensor,
}

fn uniform(shape: &[usize], fan_in: usize, rng: &mut Stream) -> Tensor {
    let bound = (1.0 / fan_in as f64).sqrt();
    let n = shape.iter().product();
    Tensor::from_vec(
        shape.to_vec(),
        (0..n).map(|_| rng.uniform(-bound, bound)).collect(),
    )
}

impl ModelParams {
    pub fn zeros(config: ModelConfig) -> Self {
        let (e, d) = (config.embed, config.hidden);
        Self {
            encoder: GruParams::zeros(e, d),
            unifier: GruParams::zeros(e, d),
            att_u: Tensor::zeros(&[d, 5 * d]),
            att_b1: Tensor::zeros(&[d]),
            att_w: Tensor::zeros(&[d]),
            att_b2: Tensor::zeros(&[1]),
            gate: GateCellParams::zeros(d, d),
            readout_w: Tensor::zeros(&[d]),
            readout_b: Tensor::zeros(&[1]),
            config,
        }
    }

    /// Weights uniform in `±sqrt(1/fan_in)`, biases zero. Each block draws
    /// from its own sub-stream of `seed`.
    pub fn init(config: ModelConfig, seed: u64) -> Self {
        let root = Stream::new(seed);
        let (e, d) = (config.embed, config.hidden);
        let mut p = Self::zeros(config);
        p.encoder = GruParams::init(e, d, &mut root.split(1));
        p.unifier = GruParams::init(e, d, &mut root.split(2));
        let mut att = root.split(3);
        p.att_u = uniform(&[d, 5 * d], 5 * d, &mut att);
        p.att_w = uniform(&[d], d, &mut att);
        p.gate = GateCellParams::init(d, d, &mut root.split(4));
        p.readout_w = uniform(&[d], d, &mut root.split(5));
        p
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.config.clone())
    }

    /// Per-tensor flag: does this variant's output depend on the tensor?
    pub fn active_mask(&self) -> Vec<bool> {
        let v = self.config.variant;
        let ima = v != Variant::Baseline;
        let iterating = ima && self.config.iterations > 0;
        let scan = self.config.uses_scan() && iterating;
        let mut mask = vec![true; 9];
        mask.extend([iterating; 9]);
        // a shared score offset cancels under softmax
        let b2 = iterating && self.config.norm() == Norm::Sigmoid;
        mask.extend([iterating, iterating, iterating, b2]);
        mask.extend([scan; 6]);
        mask.extend([true; 2]);
        mask
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        let c = &self.config;
        let header = [
            ("variant", c.variant.to_string()),
            ("embed", c.embed.to_string()),
            ("hidden", c.hidden.to_string()),
            ("iterations", c.iterations.to_string()),
            ("attention_tanh", c.attention_tanh.to_string()),
            ("ga_combine", c.ga_combine.to_string()),
            ("ga_norm", c.ga_norm.to_string()),
        ];
        Checkpoint {
            header: header
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
            tensors: self
                .names()
                .into_iter()
                .zip(self.tensors())
                .map(|(n, t)| (n.to_string(), t.clone()))
                .collect(),
        }
    }

    /// Rebuilds parameters from a checkpoint. Extra header keys are kept by
    /// the caller; missing keys or tensors are errors.
    pub fn from_checkpoint(ck: &Checkpoint) -> Result<Self, ModelError> {
        fn bad(message: String) -> ModelError {
            ModelError::Nn(NnError::MalformedCheckpoint { line: 0, message })
        }
        fn field<T: std::str::FromStr>(ck: &Checkpoint, key: &str) -> Result<T, ModelError> {
            ck.header_value(key)
                .ok_or_else(|| bad(format!("missing header {key}")))?
                .parse()
                .map_err(|_| bad(format!("bad header {key}")))
        }
        let config = ModelConfig {
            variant: field::<Variant>(ck, "variant")?,
            embed: field(ck, "embed")?,
            hidden: field(ck, "hidden")?,
            iterations: field(ck, "iterations")?,
            attention_tanh: field(ck, "attention_tanh")?,
            ga_combine: field::<GaCombine>(ck, "ga_combine")?,
            ga_norm: field::<Norm>(ck, "ga_norm")?,
        };
        let mut p = Self::zeros(config);
        let names = p.names();
        for (name, slot) in names.into_iter().zip(p.tensors_mut()) {
            let t = ck
                .tensors
                .iter()
                .find(|(n, _)| n == name)
                .map(|(_, t)| t)
                .ok_or_else(|| bad(format!("missing tensor {name}")))?;
            if t.shape() != slot.shape() {
                return Err(NnError::ShapeMismatch {
                    context: "checkpoint tensor",
                    expected: slot.shape().to_vec(),
                    found: t.shape().to_vec(),
                }
                .into());
            }
            *slot = t.clone();
        }
        Ok(p)
    }
}

impl ParamSet for ModelParams {
    fn tensors(&self) -> Vec<&Tensor> {
        let mut v = self.encoder.tensors();
        v.extend(self.unifier.tensors());
        v.extend([&self.att_u, &self.att_b1, &self.att_w, &self.att_b2]);
        v.extend(self.gate.tensors());
        v.extend([&self.readout_w, &self.readout_b]);
        v
    }

    fn tensors_mut(&mut self) -> Vec<&mut Tensor> {
        let mut v = self.encoder.tensors_mut();
        v.extend(self.unifier.tensors_mut());
        v.extend([
            &mut self.att_u,
            &mut self.att_b1,
            &mut self.att_w,
            &mut self.att_b2,
        ]);
        v.extend(self.gate.tensors_mut());
        v.extend([&mut self.readout_w, &mut self.readout_b]);
        v
    }

    fn names(&self) -> Vec<&'static str> {
        vec![
            "encoder.w_z",
            "encoder.w_r",
            "encoder.w_h",
            "encoder.u_z",
            "encoder.u_r",
            "encoder.u_h",
            "encoder.b_z",
            "encoder.b_r",
            "encoder.b_h",
            "unifier.w_z",
            "unifier.w_r",
            "unifier.w_h",
            "unifier.u_z",
            "unifier.u_r",
            "unifier.u_h",
            "unifier.b_z",
            "unifier.b_r",
            "unifier.b_h",
            "attention.u",
            "attention.b1",
            "attention.w",
            "attention.b2",
            "gate.w_r",
            "gate.w_h",
            "gate.u_r",
            "gate.u_h",
            "gate.b_r",
            "gate.b_h",
            "readout.w",
            "readout.b",
        ]
    }
}
