//! Symbolic side: facts and rules, the sentence grammar, forward chaining
//! with minimal depths, and closed-world answering.

mod atom;
mod chain;
mod grammar;
mod shuffle;

pub use atom::{Atom, Indefinite, KnowledgeBase, Noun, Pattern, Phrasing, Rule, Term, IS};
pub use chain::{
    answer, answer_with, derived_depth, forward_chain, ground_rules, Derivations, GroundRule,
    Verdict,
};
pub use grammar::{
    base_form, parse_context, parse_context_with, parse_question, parse_question_with,
    parse_sentence, parse_sentence_with, render_atom, render_rule, Lexicon,
};
pub use shuffle::{shuffle_seed, shuffle_sentences};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LogicError {
    #[error("unparseable sentence {sentence:?} (tried templates: {})", tried.join(", "))]
    UnparseableSentence {
        sentence: String,
        tried: Vec<&'static str>,
    },
    #[error("question mentions unknown entity {0:?}")]
    UnknownEntity(String),
}
