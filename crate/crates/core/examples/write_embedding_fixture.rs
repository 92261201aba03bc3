//! Regenerates `data/mini_glove.100d.txt`, the small synthetic vector table
//! bundled with the crate.
//!
//! Every token gets a 100-d vector drawn uniformly from [-0.5, 0.5] with a
//! stream keyed by the token text, so the file is reproducible and covers
//! everything the generator can emit plus some common filler words.
//!
//! ```text
//! cargo run --example write_embedding_fixture -- crates/core/data/mini_glove.100d.txt
//! ```

use std::collections::BTreeSet;
use std::fmt::Write as _;

use nesy_reasoning::datagen::vocab;
use nesy_reasoning::embeddings::{tokenize, DEFAULT_DIMENSION};
use nesy_reasoning::logic::base_form;
use nesy_reasoning::rng::{hash_str, Stream};

const GRAMMAR: &[&str] = &[
    "all",
    "and",
    "animals",
    "are",
    "do",
    "does",
    "if",
    "is",
    "it",
    "not",
    "people",
    "someone",
    "something",
    "the",
    "then",
    "they",
    "things",
];

const EXTRA: &[&str] = &[
    "a", "an", "also", "any", "be", "black", "blue", "bird", "cold", "cow", "each", "every",
    "false", "green", "happy", "has", "have", "he", "her", "him", "his", "hot", "in", "no",
    "nobody", "nothing", "of", "or", "purple", "red", "she", "so", "some", "that", "them", "there",
    "this", "to", "true", "what", "white", "who", "will", "with", "yellow", "yes", "tall", "fast",
    "angry", "calm", "clever", "gentle", "brave", "tired", "hungry", "wet", "dry", "soft", "hard",
    "loud", "cheap", "rich", "friendly", "mean", "wild", "tame", "bright", "dark", "warm", "cool",
    "light", "thick", "weak", "neat", "messy", "proud", "shy", "bold", "busy", "eager", "fancy",
    "gray", "pink", "sharp", "silly", "wise", "cruel", "grumpy", "jolly", "lucky", "odd", "plain",
    "polite", "rude", "fresh", "clean",
];

fn main() {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "crates/core/data/mini_glove.100d.txt".to_string());
    let mut tokens = BTreeSet::new();
    let phrases = vocab::ANIMAL_NAMES
        .iter()
        .chain(&vocab::PEOPLE_NAMES)
        .chain(&vocab::ANIMAL_RELATIONS)
        .chain(&vocab::ANIMAL_ATTRIBUTES)
        .chain(&vocab::PEOPLE_ATTRIBUTES)
        .chain(GRAMMAR)
        .chain(EXTRA);
    for p in phrases {
        tokens.extend(tokenize(p).tokens);
    }
    for v in vocab::verbs(&vocab::ANIMAL_RELATIONS) {
        tokens.insert(base_form(v).to_string());
    }
    let mut text = String::new();
    for t in &tokens {
        let mut s = Stream::new(hash_str(t));
        text.push_str(t);
        for _ in 0..DEFAULT_DIMENSION {
            let _ = write!(text, " {:.5}", s.uniform(-0.5, 0.5));
        }
        text.push('\n');
    }
    std::fs::write(&out, text).expect("write fixture");
    println!("{} tokens -> {out}", tokens.len());
}
