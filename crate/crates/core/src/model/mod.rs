//! Iterative memory attention networks.
//!
//! A shared encoder GRU turns the question into `q` and each context
//! sentence into `r_i`. Starting from `s⁰ = q`, every iteration re-reads each
//! sentence with a unifier GRU initialised at the current state, scores the
//! sentences from `[s; q; r_i; (s − r_i)²; s ⊙ r_i]`, and combines the unifier
//! outputs into the next state, either as an attention-weighted sum or (gate
//! attention) as a GRU scan over sentences whose update gate is the
//! attention weight. A linear readout on the final state gives the logit.
//!
//! [`reference`] implements each step as a standalone function. [`tape`]
//! runs the same computation with cached intermediates and provides the
//! backward pass used for training.

mod params;
pub mod reference;
pub mod tape;

use std::fmt;
use std::str::FromStr;

pub use params::ModelParams;
pub use reference::{
    attention, baseline_forward, embed_sentences, encode, feature_vector, forward, iterate,
    unifier, EncodedExample, IterationState, Prediction,
};
pub use tape::{
    active_indices, backward, check_gradients, check_variant, forward_tape, gradient_fixture,
    loss_and_grad, Tape, GRAD_CHECK_HIDDEN,
};

use crate::nn::NnError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    ImaSigmoid,
    ImaSoftmax,
    ImaGate,
    /// One encoder pass over context then question, straight to the readout.
    Baseline,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::ImaSigmoid,
        Variant::ImaSoftmax,
        Variant::ImaGate,
        Variant::Baseline,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::ImaSigmoid => "ima-sigmoid",
            Variant::ImaSoftmax => "ima-softmax",
            Variant::ImaGate => "ima-gate",
            Variant::Baseline => "baseline",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "ima-sigmoid" | "sigmoid" => Ok(Variant::ImaSigmoid),
            "ima-softmax" | "softmax" => Ok(Variant::ImaSoftmax),
            "ima-gate" | "gate" | "ga" => Ok(Variant::ImaGate),
            "baseline" => Ok(Variant::Baseline),
            _ => Err(format!(
                "unknown variant {s:?} (expected ima-sigmoid, ima-softmax, ima-gate or baseline)"
            )),
        }
    }
}

/// How the gate-attention variant turns unifier outputs into the next state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaCombine {
    Scan,
    WeightedSum,
}

/// Normalisation of raw attention scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Norm {
    Sigmoid,
    Softmax,
}

macro_rules! keyword_enum {
    ($ty:ty, $($name:literal => $val:expr),+) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                $(if *self == $val { return f.write_str($name); })+
                unreachable!()
            }
        }

        impl FromStr for $ty {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $($name => Ok($val),)+
                    _ => Err(format!("unknown value {s:?} for {}", stringify!($ty))),
                }
            }
        }
    };
}

keyword_enum!(GaCombine, "scan" => GaCombine::Scan, "weighted-sum" => GaCombine::WeightedSum);
keyword_enum!(Norm, "sigmoid" => Norm::Sigmoid, "softmax" => Norm::Softmax);

#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub variant: Variant,
    /// Word-vector width.
    pub embed: usize,
    /// Hidden size `d`; also the attention hidden width.
    pub hidden: usize,
    /// Iterations `T`.
    pub iterations: usize,
    /// `tanh` between the two attention layers (off gives the purely linear scorer).
    pub attention_tanh: bool,
    pub ga_combine: GaCombine,
    /// Gate normalisation for [`Variant::ImaGate`].
    pub ga_norm: Norm,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            variant: Variant::ImaGate,
            embed: crate::embeddings::DEFAULT_DIMENSION,
            hidden: 64,
            iterations: 4,
            attention_tanh: true,
            ga_combine: GaCombine::Scan,
            ga_norm: Norm::Softmax,
        }
    }
}

impl ModelConfig {
    pub fn with_variant(variant: Variant) -> Self {
        Self {
            variant,
            ..Self::default()
        }
    }

    /// Score normalisation actually used by this configuration.
    pub fn norm(&self) -> Norm {
        match self.variant {
            Variant::ImaSigmoid => Norm::Sigmoid,
            Variant::ImaGate => self.ga_norm,
            _ => Norm::Softmax,
        }
    }

    /// Whether the next state comes from the gated scan.
    pub fn uses_scan(&self) -> bool {
        self.variant == Variant::ImaGate && self.ga_combine == GaCombine::Scan
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("example has no context sentences")]
    EmptyContext,
    #[error("context sentence {0} has no tokens")]
    AllMasked(usize),
    #[error("iteration {t} exceeds the configured maximum {max}")]
    IterationOverflow { t: usize, max: usize },
    #[error(transparent)]
    Nn(#[from] NnError),
}
