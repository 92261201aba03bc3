//! Grounded forward chaining with minimal derivation depths, and the
//! closed-world question answerer built on it.

use std::collections::HashMap;
use std::fmt;

use super::atom::{Atom, KnowledgeBase, Rule};
use super::LogicError;

/// Every derivable literal with its minimal derivation depth.
pub type Derivations = HashMap<Atom, u32>;

/// Depth of a consequent given the depths of the antecedents that fired it:
/// one more than the deepest antecedent (proof-tree height in rule
/// applications). This is the single place the depth convention lives.
pub fn derived_depth(antecedent_depths: impl IntoIterator<Item = u32>) -> u32 {
    1 + antecedent_depths.into_iter().max().unwrap_or(0)
}

/// A rule instance with the variable bound to a concrete entity.
#[derive(Debug, Clone)]
pub struct GroundRule {
    pub antecedents: Vec<Atom>,
    pub consequent: Atom,
}

/// Instantiates every non-fact rule over the knowledge base's own entities.
pub fn ground_rules(kb: &KnowledgeBase) -> Vec<GroundRule> {
    let mut out = Vec::new();
    for rule in kb.rules() {
        if rule.has_var() {
            for e in &kb.entity_universe {
                out.push(instantiate(rule, e));
            }
        } else {
            out.push(instantiate(rule, ""));
        }
    }
    out
}

fn instantiate(rule: &Rule, value: &str) -> GroundRule {
    GroundRule {
        antecedents: rule
            .antecedents
            .iter()
            .map(|p| p.instantiate(value))
            .collect(),
        consequent: rule.consequent.instantiate(value),
    }
}

/// Least fixpoint of the grounded rules, with each literal's minimal depth
/// (facts at 0).
///
/// Depths are relaxed to a fixpoint, so the result depends only on the set
/// of sentences, never on their order. Negated literals are ordinary
/// literals here; negation as failure applies only when answering.
pub fn forward_chain(kb: &KnowledgeBase) -> Derivations {
    let mut depth: Derivations = HashMap::new();
    for fact in kb.facts() {
        depth.insert(fact.consequent.instantiate(""), 0);
    }
    let ground = ground_rules(kb);
    loop {
        let mut changed = false;
        for g in &ground {
            let Some(ds) = g
                .antecedents
                .iter()
                .map(|a| depth.get(a).copied())
                .collect::<Option<Vec<u32>>>()
            else {
                continue;
            };
            let d = derived_depth(ds);
            match depth.get_mut(&g.consequent) {
                Some(old) if *old <= d => {}
                Some(old) => {
                    *old = d;
                    changed = true;
                }
                None => {
                    depth.insert(g.consequent.clone(), d);
                    changed = true;
                }
            }
        }
        if !changed {
            return depth;
        }
    }
}

/// Answer to a question under the closed-world assumption.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Verdict {
    pub label: bool,
    /// Depth of the derivation that decided the answer; `None` when the
    /// answer rests on failure to derive (NOT_DERIVABLE).
    pub depth: Option<u32>,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.depth {
            Some(d) => write!(f, "({}, depth {d})", self.label),
            None => write!(f, "({}, NOT_DERIVABLE)", self.label),
        }
    }
}

/// Answers `question` against precomputed derivations.
///
/// An affirmative question is true iff its atom is derivable. A negated
/// question is true iff the affirmative atom is not derivable (negation
/// as failure). The reported depth is that of whichever literal decided
/// the answer: the affirmative atom when it is derivable, otherwise the
/// negated literal when that is stated or derived, otherwise none.
pub fn answer_with(derived: &Derivations, question: &Atom) -> Verdict {
    let positive = derived.get(&question.affirmative()).copied();
    if question.polarity {
        match positive {
            Some(d) => Verdict {
                label: true,
                depth: Some(d),
            },
            None => Verdict {
                label: false,
                depth: derived.get(&question.negated()).copied(),
            },
        }
    } else {
        match positive {
            Some(d) => Verdict {
                label: false,
                depth: Some(d),
            },
            None => Verdict {
                label: true,
                depth: derived.get(question).copied(),
            },
        }
    }
}

pub fn answer(kb: &KnowledgeBase, question: &Atom) -> Result<Verdict, LogicError> {
    if !kb.entity_universe.contains(&question.subject) {
        return Err(LogicError::UnknownEntity(question.subject.clone()));
    }
    Ok(answer_with(&forward_chain(kb), question))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::grammar::{parse_context, parse_question};

    pub(crate) const FIGURE_2: [&str; 8] = [
        "Anne is rough.",
        "Anne is blue.",
        "Cold people are rough.",
        "Rough people are young.",
        "If Anne is green then Anne is blue.",
        "If someone is rough and nice then they are green.",
        "If someone is rough and furry then they are blue.",
        "All young people are cold.",
    ];

    fn ask(q: &str) -> Verdict {
        let kb = parse_context(&FIGURE_2).unwrap();
        answer(&kb, &parse_question(q).unwrap()).unwrap()
    }

    #[test]
    fn figure_two_depths() {
        let kb = parse_context(&FIGURE_2).unwrap();
        let d = forward_chain(&kb);
        assert_eq!(d[&Atom::attribute("Anne", "rough", true)], 0);
        assert_eq!(d[&Atom::attribute("Anne", "young", true)], 1);
        assert_eq!(d[&Atom::attribute("Anne", "cold", true)], 2);
        assert!(!d.contains_key(&Atom::attribute("Anne", "green", true)));
    }

    #[test]
    fn figure_two_questions() {
        assert_eq!(
            ask("Anne is cold."),
            Verdict {
                label: true,
                depth: Some(2)
            }
        );
        assert_eq!(
            ask("Anne is not young."),
            Verdict {
                label: false,
                depth: Some(1)
            }
        );
        assert_eq!(
            ask("Anne is not green."),
            Verdict {
                label: true,
                depth: None
            }
        );
    }

    #[test]
    fn unknown_entity() {
        let kb = parse_context(&FIGURE_2).unwrap();
        let err = answer(&kb, &Atom::attribute("Bob", "cold", true)).unwrap_err();
        assert!(matches!(err, LogicError::UnknownEntity(e) if e == "Bob"));
    }

    #[test]
    fn empty_and_facts_only() {
        assert!(forward_chain(&KnowledgeBase::default()).is_empty());
        let kb =
            parse_context(&["Anne is rough.", "Bob is big.", "The tiger sees the cat."]).unwrap();
        let d = forward_chain(&kb);
        assert_eq!(d.len(), 3);
        assert!(d.values().all(|&v| v == 0));
    }

    #[test]
    fn conjunction_depth_is_tree_height() {
        // nice at depth 1, cold at depth 2, so green = 1 + max(2, 1) = 3
        let kb = parse_context(&[
            "Anne is rough.",
            "Rough people are nice.",
            "Nice people are cold.",
            "If someone is cold and nice then they are green.",
        ])
        .unwrap();
        let d = forward_chain(&kb);
        assert_eq!(d[&Atom::attribute("Anne", "green", true)], 3);
    }

    #[test]
    fn negated_literals_chain() {
        let kb = parse_context(&[
            "Bob is big.",
            "Big people are not kind.",
            "If someone is not kind then they are sad.",
        ])
        .unwrap();
        let d = forward_chain(&kb);
        assert_eq!(d[&Atom::attribute("Bob", "kind", false)], 1);
        assert_eq!(d[&Atom::attribute("Bob", "sad", true)], 2);
        let v = answer(&kb, &Atom::attribute("Bob", "kind", false)).unwrap();
        assert_eq!(
            v,
            Verdict {
                label: true,
                depth: Some(1)
            }
        );
        // refuted by the derived negation, so the depth is known
        let v = answer(&kb, &Atom::attribute("Bob", "kind", true)).unwrap();
        assert_eq!(
            v,
            Verdict {
                label: false,
                depth: Some(1)
            }
        );
        let v = answer(&kb, &Atom::attribute("Bob", "young", true)).unwrap();
        assert_eq!(
            v,
            Verdict {
                label: false,
                depth: None
            }
        );
    }

    #[test]
    fn relation_rules_ground_over_universe() {
        let kb = parse_context(&[
            "The cat chases the mouse.",
            "If something chases the mouse then it is fierce.",
            "If something is fierce then it attacks the dog.",
        ])
        .unwrap();
        let d = forward_chain(&kb);
        assert_eq!(d[&Atom::attribute("the cat", "fierce", true)], 1);
        assert_eq!(d[&Atom::new("the cat", "attacks", "the dog", true)], 2);
        assert!(!d.contains_key(&Atom::attribute("the mouse", "fierce", true)));
    }
}
