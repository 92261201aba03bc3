//! Deductive reasoning over controlled natural language.
//!
//! * [`logic`]: parse facts and rules, forward-chain to minimal depths, and
//!   answer questions under the closed-world assumption.
//! * [`datagen`]: generate depth-balanced datasets whose labels are checked
//!   by the oracle, and read/write them as JSON lines.
//! * [`embeddings`]: tokenization and frozen word vectors.
//! * [`nn`]: a small f64 toolkit (GRU, softmax, BCE, Adam, gradient checks).
//! * [`model`]: iterative memory attention networks (sigmoid, softmax and
//!   gate-attention variants) plus a plain recurrent baseline.
//! * [`train`]: training, depth-stratified and shuffled-context evaluation,
//!   and reports.
//! * [`cli`]: the `nesy` command line.

pub mod cli;
pub mod datagen;
pub mod embeddings;
pub mod logic;
pub mod model;
pub mod nn;
pub mod rng;
pub mod train;
