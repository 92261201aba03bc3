//! Dataset generation, verification against the oracle, and record I/O.

mod generator;
mod records;
pub mod vocab;

pub use generator::{
    generate_cell, generate_dataset, generate_example, Category, ExamplePair, GenerationSpec,
    PairKind, Scenario, TABLE2_COUNTS,
};
pub use records::{
    read_examples, read_records, write_examples, write_records, DatasetSplit, Example, SplitName,
};

use crate::logic::{answer, parse_context, parse_question, LogicError};

#[derive(Debug, thiserror::Error)]
pub enum DatagenError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed record at line {line}: {message}")]
    MalformedRecord { line: usize, message: String },
    #[error("cannot build a depth-{depth} chain from {available} attributes without repetition")]
    VocabExhausted { depth: u32, available: usize },
    #[error("no verified example of depth {depth} after {attempts} attempts")]
    GenerationFailed { depth: u32, attempts: u64 },
    #[error("invalid generation spec: {0}")]
    InvalidSpec(String),
}

/// Outcome of re-deriving one example with the oracle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub label_ok: bool,
    /// `None` when the oracle answered by negation as failure, so there is
    /// no derivation depth to compare.
    pub depth_ok: Option<bool>,
}

pub fn verify_example(ex: &Example) -> Result<Check, LogicError> {
    let kb = parse_context(&ex.context)?;
    let q = parse_question(&ex.question)?;
    let v = answer(&kb, &q)?;
    Ok(Check {
        label_ok: v.label == ex.label,
        depth_ok: v.depth.map(|d| d == ex.depth),
    })
}

/// Tally of a verification pass over many examples.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VerifyReport {
    pub total: usize,
    pub label_mismatches: usize,
    pub depth_checked: usize,
    pub depth_mismatches: usize,
    /// Examples the oracle could not process (parse errors, unknown entities).
    pub errors: usize,
}

impl VerifyReport {
    pub fn mismatches(&self) -> usize {
        self.label_mismatches + self.depth_mismatches + self.errors
    }
}

pub fn verify_examples(examples: &[Example]) -> VerifyReport {
    use rayon::prelude::*;
    let checks: Vec<Result<Check, LogicError>> = examples.par_iter().map(verify_example).collect();
    let mut rep = VerifyReport {
        total: examples.len(),
        ..Default::default()
    };
    for c in checks {
        match c {
            Ok(c) => {
                rep.label_mismatches += usize::from(!c.label_ok);
                if let Some(ok) = c.depth_ok {
                    rep.depth_checked += 1;
                    rep.depth_mismatches += usize::from(!ok);
                }
            }
            Err(_) => rep.errors += 1,
        }
    }
    rep
}
