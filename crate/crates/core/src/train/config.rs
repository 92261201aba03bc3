//! Training configuration and its `key = value` text form.
//!
//! ```text
//! # comments and blank lines are ignored
//! variant = ima-gate
//! learning_rate = 0.01
//! epochs = 10
//! train = data/train.jsonl
//! ```

use std::fmt;
use std::path::PathBuf;

use crate::model::{GaCombine, ModelConfig, Norm, Variant};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    /// Iterations `T`.
    pub iterations: usize,
    /// Hidden size `d`.
    pub hidden: usize,
    pub seed: u64,
    pub variant: Variant,
    pub shuffle_rules_each_batch: bool,
    /// Fine-tune word vectors of tokens seen in training.
    pub train_embeddings: bool,
    pub attention_tanh: bool,
    pub ga_combine: GaCombine,
    pub ga_norm: Norm,
    /// Keep a copy of the parameters with the best dev accuracy.
    pub keep_best: bool,
    pub train_path: Option<PathBuf>,
    pub dev_path: Option<PathBuf>,
    pub test_path: Option<PathBuf>,
    pub embeddings_path: Option<PathBuf>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-2,
            batch_size: 32,
            epochs: 30,
            iterations: 4,
            hidden: 64,
            seed: 0,
            variant: Variant::ImaGate,
            shuffle_rules_each_batch: true,
            train_embeddings: false,
            attention_tanh: true,
            ga_combine: GaCombine::Scan,
            ga_norm: Norm::Softmax,
            keep_best: false,
            train_path: None,
            dev_path: None,
            test_path: None,
            embeddings_path: None,
        }
    }
}

/// Keys accepted by [`TrainConfig::set`].
pub const CONFIG_KEYS: &[&str] = &[
    "learning_rate",
    "batch_size",
    "epochs",
    "iterations",
    "hidden",
    "seed",
    "variant",
    "shuffle_rules_each_batch",
    "train_embeddings",
    "attention_tanh",
    "ga_combine",
    "ga_norm",
    "keep_best",
    "train",
    "dev",
    "test",
    "embeddings",
];

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String> {
    value
        .parse()
        .map_err(|_| format!("bad value {value:?} for {key}"))
}

impl TrainConfig {
    /// Sets one field from its text form. `lr`, `T` and `d` are accepted
    /// as aliases.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let value = value.trim();
        match key.trim().replace('-', "_").as_str() {
            "learning_rate" | "lr" => self.learning_rate = parse(key, value)?,
            "batch_size" => self.batch_size = parse(key, value)?,
            "epochs" => self.epochs = parse(key, value)?,
            "iterations" | "T" => self.iterations = parse(key, value)?,
            "hidden" | "d" => self.hidden = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "variant" => self.variant = value.parse()?,
            "shuffle_rules_each_batch" => self.shuffle_rules_each_batch = parse(key, value)?,
            "train_embeddings" => self.train_embeddings = parse(key, value)?,
            "attention_tanh" => self.attention_tanh = parse(key, value)?,
            "ga_combine" => self.ga_combine = value.parse()?,
            "ga_norm" => self.ga_norm = value.parse()?,
            "keep_best" => self.keep_best = parse(key, value)?,
            "train" => self.train_path = Some(value.into()),
            "dev" => self.dev_path = Some(value.into()),
            "test" => self.test_path = Some(value.into()),
            "embeddings" => self.embeddings_path = Some(value.into()),
            other => return Err(format!("unknown config key {other:?}")),
        }
        Ok(())
    }

    /// Applies a `key = value` document on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<(), String> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key = value", n + 1))?;
            self.set(k, v).map_err(|e| format!("line {}: {e}", n + 1))?;
        }
        self.validate()
    }

    pub fn from_text(text: &str) -> Result<Self, String> {
        let mut c = Self::default();
        c.apply_text(text)?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            ));
        }
        if self.batch_size == 0 {
            return Err("batch_size must be positive".into());
        }
        if self.hidden == 0 {
            return Err("hidden must be positive".into());
        }
        Ok(())
    }

    pub fn model_config(&self, embed: usize) -> ModelConfig {
        ModelConfig {
            variant: self.variant,
            embed,
            hidden: self.hidden,
            iterations: self.iterations,
            attention_tanh: self.attention_tanh,
            ga_combine: self.ga_combine,
            ga_norm: self.ga_norm,
        }
    }
}

impl fmt::Display for TrainConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "variant {} lr {:e} batch {} epochs {} T {} d {} seed {} shuffle_rules {}",
            self.variant,
            self.learning_rate,
            self.batch_size,
            self.epochs,
            self.iterations,
            self.hidden,
            self.seed,
            self.shuffle_rules_each_batch
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = TrainConfig::default();
        assert_eq!(
            (
                c.learning_rate,
                c.batch_size,
                c.epochs,
                c.iterations,
                c.hidden,
                c.seed
            ),
            (1e-2, 32, 30, 4, 64, 0)
        );
        assert!(c.shuffle_rules_each_batch);
        assert_eq!(
            c.to_string(),
            "variant ima-gate lr 1e-2 batch 32 epochs 30 T 4 d 64 seed 0 shuffle_rules true"
        );
    }

    #[test]
    fn text_form() {
        let c = TrainConfig::from_text(
            "# recipe\nvariant = ima-sigmoid\nlr=0.005\n\nepochs = 3 # short\ntrain = a.jsonl\n",
        )
        .unwrap();
        assert_eq!(c.variant, Variant::ImaSigmoid);
        assert_eq!(c.learning_rate, 0.005);
        assert_eq!(c.epochs, 3);
        assert_eq!(c.train_path, Some("a.jsonl".into()));
        assert!(TrainConfig::from_text("bogus = 1").is_err());
        assert!(TrainConfig::from_text("epochs").is_err());
        assert!(TrainConfig::from_text("batch_size = 0").is_err());
        assert!(TrainConfig::from_text("learning_rate = -1").is_err());
    }
}
