//! Balanced-depth example generation.
//!
//! Each call builds one context around a chain of attribute rules of exactly
//! the requested depth, adds distractor facts and rules about the other
//! three entities, and emits a (true, false) question pair. Every pair is
//! re-checked by parsing the rendered sentences and running the oracle;
//! samples that disagree (a distractor opened a shortcut, say) are redrawn.

use std::collections::BTreeMap;

use rayon::prelude::*;

use super::records::{DatasetSplit, Example, SplitName};
use super::{vocab, DatagenError};
use crate::logic::{
    answer_with, forward_chain, parse_context, parse_question, render_atom, render_rule, Atom,
    Derivations, Indefinite, Noun, Pattern, Phrasing, Rule, Term,
};
use crate::rng::Stream;

const MAX_ATTEMPTS: u64 = 64;
const CONJUNCTION_PROB: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Category {
    Animal,
    People,
}

impl Category {
    pub fn names(self) -> &'static [&'static str] {
        match self {
            Category::Animal => &vocab::ANIMAL_NAMES,
            Category::People => &vocab::PEOPLE_NAMES,
        }
    }

    pub fn relations(self) -> &'static [&'static str] {
        match self {
            Category::Animal => &vocab::ANIMAL_RELATIONS,
            Category::People => &vocab::PEOPLE_RELATIONS,
        }
    }

    pub fn attributes(self) -> &'static [&'static str] {
        match self {
            Category::Animal => &vocab::ANIMAL_ATTRIBUTES,
            Category::People => &vocab::PEOPLE_ATTRIBUTES,
        }
    }

    fn nouns(self) -> &'static [Noun] {
        match self {
            Category::Animal => &[Noun::Animals, Noun::Things],
            Category::People => &[Noun::People],
        }
    }

    fn indefinite(self) -> Indefinite {
        match self {
            Category::Animal => Indefinite::Something,
            Category::People => Indefinite::Someone,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Animal => "animal",
            Category::People => "people",
        }
    }
}

/// One of the four (category, negation) generation settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Scenario {
    pub category: Category,
    pub negation_rules: bool,
}

impl Scenario {
    pub fn all() -> [Scenario; 4] {
        [
            Scenario {
                category: Category::People,
                negation_rules: false,
            },
            Scenario {
                category: Category::People,
                negation_rules: true,
            },
            Scenario {
                category: Category::Animal,
                negation_rules: false,
            },
            Scenario {
                category: Category::Animal,
                negation_rules: true,
            },
        ]
    }
}

/// Example counts per split and depth for the full-size corpus.
pub const TABLE2_COUNTS: [(SplitName, [usize; 4]); 3] = [
    (SplitName::Train, [89952, 90016, 90010, 90022]),
    (SplitName::Dev, [16204, 16154, 16150, 16150]),
    (SplitName::Test, [2708, 2694, 2704, 2692]),
];

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationSpec {
    /// Settings cycled over question pairs (pair `k` uses `scenarios[k % len]`).
    pub scenarios: Vec<Scenario>,
    pub depths: Vec<u32>,
    /// Number of examples per split per depth.
    pub counts: BTreeMap<SplitName, BTreeMap<u32, usize>>,
    pub seed: u64,
}

impl GenerationSpec {
    /// Same example count for every depth of one split, other splits empty.
    pub fn single_split(
        scenarios: Vec<Scenario>,
        depths: &[u32],
        split: SplitName,
        per_depth: usize,
        seed: u64,
    ) -> Self {
        let mut counts = BTreeMap::new();
        for s in SplitName::ALL {
            let n = if s == split { per_depth } else { 0 };
            counts.insert(s, depths.iter().map(|&d| (d, n)).collect());
        }
        Self {
            scenarios,
            depths: depths.to_vec(),
            counts,
            seed,
        }
    }

    /// Full-size corpus: depths 2-5 with the published split sizes, all four
    /// scenarios interleaved.
    pub fn full_size(seed: u64) -> Self {
        let depths = vec![2, 3, 4, 5];
        let counts = TABLE2_COUNTS
            .iter()
            .map(|(s, ns)| (*s, depths.iter().copied().zip(ns.iter().copied()).collect()))
            .collect();
        Self {
            scenarios: Scenario::all().to_vec(),
            depths,
            counts,
            seed,
        }
    }

    pub fn count(&self, split: SplitName, depth: u32) -> usize {
        self.counts
            .get(&split)
            .and_then(|m| m.get(&depth))
            .copied()
            .unwrap_or(0)
    }

    pub fn validate(&self) -> Result<(), DatagenError> {
        if self.depths.is_empty() {
            return Err(DatagenError::InvalidSpec("no depths requested".into()));
        }
        if self.scenarios.is_empty() {
            return Err(DatagenError::InvalidSpec("no scenarios".into()));
        }
        if let Some(d) = self.depths.iter().find(|d| !(2..=5).contains(*d)) {
            return Err(DatagenError::InvalidSpec(format!(
                "depth {d} outside 2..=5"
            )));
        }
        for (split, per_depth) in &self.counts {
            if let Some(d) = per_depth.keys().find(|d| !self.depths.contains(d)) {
                return Err(DatagenError::InvalidSpec(format!(
                    "{} has counts for undeclared depth {d}",
                    split.as_str()
                )));
            }
        }
        Ok(())
    }
}

/// How the question pair of an example was formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairKind {
    /// The derived terminal literal (true) and its opposite (false).
    Terminal,
    /// An attribute the subject cannot derive in either polarity: its
    /// negation is true by negation as failure, the attribute itself false.
    Underivable,
}

/// A generated context with its two questions, before id assignment.
#[derive(Debug, Clone)]
pub struct ExamplePair {
    pub positive: Example,
    pub negative: Example,
    pub kind: PairKind,
    /// Indices into `context` of sentences not needed for the chain.
    pub distractors: Vec<usize>,
}

struct Draft {
    facts: Vec<Rule>,
    rules: Vec<Rule>,
    /// parallel to facts/rules: true when the sentence is part of the chain
    facts_core: Vec<bool>,
    rules_core: Vec<bool>,
    subject: String,
    terminal: Atom,
    context_attributes: Vec<String>,
}

fn attr_pattern(subject: &Term, attribute: &str, polarity: bool) -> Pattern {
    Pattern {
        subject: subject.clone(),
        relation: crate::logic::IS.to_string(),
        object: attribute.to_string(),
        polarity,
    }
}

/// A single-link rule `a(X) ⇒ b(X)` in a randomly chosen phrasing.
fn link_rule(
    rng: &mut Stream,
    category: Category,
    subject: &str,
    antecedents: Vec<(String, bool)>,
    consequent: (String, bool),
) -> Rule {
    let generic_ok = antecedents.len() == 1 && antecedents[0].1;
    let choice = rng.index(if generic_ok { 5 } else { 3 });
    // 0,1: conditional over the variable; 2: ground conditional; 3: generic; 4: universal
    let ground = choice == 2;
    let term = if ground {
        Term::Entity(subject.to_string())
    } else {
        Term::Var
    };
    let phrasing = match choice {
        0 | 1 => Phrasing::Conditional(Some(category.indefinite())),
        2 => Phrasing::Conditional(None),
        3 => Phrasing::Generic(*rng.choose(category.nouns())),
        _ => Phrasing::Universal(*rng.choose(category.nouns())),
    };
    Rule {
        antecedents: antecedents
            .iter()
            .map(|(a, p)| attr_pattern(&term, a, *p))
            .collect(),
        consequent: attr_pattern(&term, &consequent.0, consequent.1),
        phrasing,
    }
}

fn fact(subject: &str, attribute: &str, polarity: bool) -> Rule {
    Rule::fact(&Atom::attribute(subject, attribute, polarity))
}

fn draft(rng: &mut Stream, scenario: Scenario, depth: u32) -> Result<Draft, DatagenError> {
    let category = scenario.category;
    let depth = depth as usize;
    let attrs = category.attributes();
    if depth == 0 || depth + 1 > attrs.len() {
        return Err(DatagenError::VocabExhausted {
            depth: depth as u32,
            available: attrs.len(),
        });
    }

    let mut names: Vec<&str> = category.names().to_vec();
    rng.shuffle(&mut names);
    let items: Vec<&str> = names[..4].to_vec();
    let subject = items[0];
    let mut verbs = vocab::verbs(category.relations());
    rng.shuffle(&mut verbs);

    let mut pool: Vec<&str> = attrs.to_vec();
    rng.shuffle(&mut pool);
    let chain: Vec<&str> = pool.drain(..=depth).collect();

    // The terminal polarity is a fair coin under negation so that negated
    // questions are equally common among true and false labels.
    let mut polarity = vec![true; depth + 1];
    if scenario.negation_rules {
        for p in polarity.iter_mut().take(depth).skip(1) {
            *p = !rng.bernoulli(0.35);
        }
        polarity[depth] = rng.bernoulli(0.5);
        if polarity.iter().all(|&p| p) {
            let k = if depth > 1 {
                1 + rng.index(depth - 1)
            } else {
                depth
            };
            polarity[k] = false;
        }
    }

    let mut facts = vec![fact(subject, chain[0], true)];
    let mut facts_core = vec![true];
    let mut rules = Vec::new();
    let mut rules_core = Vec::new();
    let mut context_attributes: Vec<String> = chain.iter().map(|s| s.to_string()).collect();

    for k in 0..depth {
        let mut ante = vec![(chain[k].to_string(), polarity[k])];
        let conj = k + 1 < depth && !pool.is_empty() && rng.bernoulli(CONJUNCTION_PROB);
        if conj {
            let extra = pool.remove(0);
            let pol = !(scenario.negation_rules && rng.bernoulli(0.3));
            facts.push(fact(subject, extra, pol));
            facts_core.push(true);
            ante.push((extra.to_string(), pol));
            context_attributes.push(extra.to_string());
        }
        rules.push(link_rule(
            rng,
            category,
            subject,
            ante,
            (chain[k + 1].to_string(), polarity[k + 1]),
        ));
        rules_core.push(true);
    }

    // Distractor facts: one per other entity.
    let pick_attr = |rng: &mut Stream, pool: &[&'static str]| -> &'static str {
        if !pool.is_empty() && rng.bernoulli(0.6) {
            *rng.choose(pool)
        } else {
            *rng.choose(attrs)
        }
    };
    let mut other_facts: Vec<(&str, &str)> = Vec::new();
    for (i, &e) in items.iter().enumerate().skip(1) {
        if !verbs.is_empty() && rng.bernoulli(0.4) {
            let verb = verbs[i % verbs.len()];
            let mut j = rng.index(items.len() - 1);
            if j >= i {
                j += 1;
            }
            let pol = !(scenario.negation_rules && rng.bernoulli(0.2));
            facts.push(Rule::fact(&Atom::new(e, verb, items[j], pol)));
        } else {
            let a = pick_attr(rng, &pool);
            let pol = !(scenario.negation_rules && rng.bernoulli(0.2));
            facts.push(fact(e, a, pol));
            if pol {
                other_facts.push((e, a));
            }
            context_attributes.push(a.to_string());
        }
        facts_core.push(false);
    }

    // Distractor rules: one from another entity's attribute (or a chain
    // attribute), one "near miss" whose antecedent the subject lacks, and
    // for animals sometimes one conditioned on a relation.
    let n_rules = 2 + rng.index(2);
    for r in 0..n_rules {
        let Some(&cons) = (!pool.is_empty()).then(|| rng.choose(&pool)) else {
            break;
        };
        let cons_pol = !(scenario.negation_rules && rng.bernoulli(0.2));
        let rule = if r == 2 && !verbs.is_empty() {
            let verb = *rng.choose(&verbs);
            let target = *rng.choose(&items[1..]);
            Rule {
                antecedents: vec![Pattern {
                    subject: Term::Var,
                    relation: verb.to_string(),
                    object: target.to_string(),
                    polarity: true,
                }],
                consequent: attr_pattern(&Term::Var, cons, cons_pol),
                phrasing: Phrasing::Conditional(Some(category.indefinite())),
            }
        } else {
            let ante = if r == 0 && !other_facts.is_empty() {
                rng.choose(&other_facts).1
            } else if r == 0 {
                *rng.choose(&chain[1..])
            } else {
                pick_attr(rng, &pool)
            };
            let about = items[1 + rng.index(3)];
            link_rule(
                rng,
                category,
                about,
                vec![(ante.to_string(), true)],
                (cons.to_string(), cons_pol),
            )
        };
        // ground conditionals above are about another entity, never the subject
        context_attributes.push(cons.to_string());
        rules.push(rule);
        rules_core.push(false);
    }

    context_attributes.sort();
    context_attributes.dedup();
    Ok(Draft {
        facts,
        rules,
        facts_core,
        rules_core,
        subject: subject.to_string(),
        terminal: Atom::attribute(subject, chain[depth], polarity[depth]),
        context_attributes,
    })
}

fn derivable_either(derived: &Derivations, subject: &str, attribute: &str) -> bool {
    derived.contains_key(&Atom::attribute(subject, attribute, true))
        || derived.contains_key(&Atom::attribute(subject, attribute, false))
}

fn check(derived: &Derivations, question: &str, label: bool, depth: u32) -> bool {
    let Ok(q) = parse_question(question) else {
        return false;
    };
    let v = answer_with(derived, &q);
    v.label == label && v.depth.map_or(true, |d| d == depth)
}

/// Generates one (true-labelled, false-labelled) question pair over a fresh
/// context with a reasoning chain of exactly `depth` rule applications.
pub fn generate_example(
    scenario: Scenario,
    depth: u32,
    rng: &Stream,
) -> Result<ExamplePair, DatagenError> {
    for attempt in 0..MAX_ATTEMPTS {
        let mut r = rng.split(attempt);
        let d = draft(&mut r, scenario, depth)?;

        // Sentence order: facts, then rules, each group shuffled.
        let fact_order = r.permutation(d.facts.len());
        let rule_order = r.permutation(d.rules.len());
        let mut context = Vec::new();
        let mut distractors = Vec::new();
        for &i in &fact_order {
            if !d.facts_core[i] {
                distractors.push(context.len());
            }
            context.push(render_rule(&d.facts[i]));
        }
        for &i in &rule_order {
            if !d.rules_core[i] {
                distractors.push(context.len());
            }
            context.push(render_rule(&d.rules[i]));
        }

        let Ok(kb) = parse_context(&context) else {
            continue;
        };
        let derived = forward_chain(&kb);
        let terminal_ok = answer_with(&derived, &d.terminal)
            == crate::logic::Verdict {
                label: true,
                depth: Some(depth),
            };
        // no contradictions about the terminal attribute
        if !terminal_ok || derived.contains_key(&d.terminal.negated()) {
            continue;
        }

        let underivable: Vec<&String> = d
            .context_attributes
            .iter()
            .filter(|a| !derivable_either(&derived, &d.subject, a))
            .collect();
        let Some(&u) = (!underivable.is_empty()).then(|| r.choose(&underivable)) else {
            continue;
        };

        // Pair mix keeping P(question negated | label) at one half:
        // an affirmative terminal always pairs with the Terminal kind under
        // negation; otherwise Terminal and Underivable are a fair coin.
        let terminal_kind = if scenario.negation_rules && d.terminal.polarity {
            true
        } else {
            r.bernoulli(0.5)
        };
        let (kind, pos_q, neg_q) = if terminal_kind {
            (PairKind::Terminal, d.terminal.clone(), d.terminal.negated())
        } else {
            let u = Atom::attribute(&d.subject, u, false);
            (PairKind::Underivable, u.clone(), u.negated())
        };
        let pos_text = render_atom(&pos_q);
        let neg_text = render_atom(&neg_q);
        if !check(&derived, &pos_text, true, depth) || !check(&derived, &neg_text, false, depth) {
            continue;
        }
        let mk = |question: String, label: bool| Example {
            id: String::new(),
            context: context.clone(),
            question,
            label,
            depth,
        };
        return Ok(ExamplePair {
            positive: mk(pos_text, true),
            negative: mk(neg_text, false),
            kind,
            distractors,
        });
    }
    Err(DatagenError::GenerationFailed {
        depth,
        attempts: MAX_ATTEMPTS,
    })
}

fn split_tag(s: SplitName) -> u64 {
    match s {
        SplitName::Train => 1,
        SplitName::Dev => 2,
        SplitName::Test => 3,
    }
}

/// Generates `count` examples of one (split, depth) cell: `ceil(count / 2)`
/// pairs, the last truncated to its positive question when `count` is odd.
pub fn generate_cell(
    spec: &GenerationSpec,
    split: SplitName,
    depth: u32,
    count: usize,
) -> Result<Vec<Example>, DatagenError> {
    let root = Stream::new(spec.seed).derive(&[split_tag(split), u64::from(depth)]);
    let pairs = count.div_ceil(2);
    let generated: Vec<ExamplePair> = (0..pairs)
        .into_par_iter()
        .map(|k| {
            let scenario = spec.scenarios[k % spec.scenarios.len()];
            generate_example(scenario, depth, &root.split(k as u64))
        })
        .collect::<Result<_, _>>()?;
    let mut out = Vec::with_capacity(count);
    for (k, pair) in generated.into_iter().enumerate() {
        let ExamplePair {
            mut positive,
            mut negative,
            ..
        } = pair;
        positive.id = format!("{}-d{depth}-{k:06}-t", split.as_str());
        negative.id = format!("{}-d{depth}-{k:06}-f", split.as_str());
        out.push(positive);
        if out.len() < count {
            out.push(negative);
        }
    }
    Ok(out)
}

/// Generates all three splits. Deterministic in `spec`.
pub fn generate_dataset(
    spec: &GenerationSpec,
) -> Result<BTreeMap<SplitName, DatasetSplit>, DatagenError> {
    spec.validate()?;
    let mut out = BTreeMap::new();
    for split in SplitName::ALL {
        let mut examples = Vec::new();
        for &depth in &spec.depths {
            examples.extend(generate_cell(spec, split, depth, spec.count(split, depth))?);
        }
        out.insert(split, DatasetSplit::new(split, examples));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{answer, parse_context, parse_question, parse_sentence};
    use std::collections::HashSet;

    fn people() -> Scenario {
        Scenario {
            category: Category::People,
            negation_rules: false,
        }
    }

    #[test]
    fn pair_verifies_for_every_scenario_and_depth() {
        for scenario in Scenario::all() {
            for depth in 2..=5 {
                for k in 0..30 {
                    let pair = generate_example(scenario, depth, &Stream::new(k)).unwrap();
                    for ex in [&pair.positive, &pair.negative] {
                        let kb = parse_context(&ex.context).unwrap();
                        let v = answer(&kb, &parse_question(&ex.question).unwrap()).unwrap();
                        assert_eq!(v.label, ex.label, "{ex:?}");
                        if let Some(d) = v.depth {
                            assert_eq!(d, depth);
                        }
                    }
                    if pair.kind == PairKind::Terminal {
                        let kb = parse_context(&pair.positive.context).unwrap();
                        for q in [&pair.positive.question, &pair.negative.question] {
                            let q = parse_question(q).unwrap();
                            assert_eq!(answer(&kb, &q).unwrap().depth, Some(depth));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn negated_questions_do_not_predict_labels() {
        for scenario in Scenario::all() {
            let mut negated = [0usize; 2];
            let n = 400;
            for k in 0..n {
                let pair = generate_example(scenario, 2, &Stream::new(k)).unwrap();
                for (slot, ex) in [(1, &pair.positive), (0, &pair.negative)] {
                    negated[slot] += usize::from(ex.question.contains(" not "));
                }
            }
            for count in negated {
                let share = count as f64 / n as f64;
                assert!((share - 0.5).abs() < 0.08, "{scenario:?}: {negated:?}");
            }
        }
    }

    #[test]
    fn four_entities_mentioned() {
        for scenario in Scenario::all() {
            for k in 0..20 {
                let pair = generate_example(scenario, 3, &Stream::new(k)).unwrap();
                let kb = parse_context(&pair.positive.context).unwrap();
                assert_eq!(kb.entity_universe.len(), 4, "{:?}", pair.positive.context);
            }
        }
    }

    #[test]
    fn negation_variant_has_a_negated_rule() {
        let scenario = Scenario {
            category: Category::Animal,
            negation_rules: true,
        };
        for k in 0..50 {
            let pair = generate_example(scenario, 2, &Stream::new(k)).unwrap();
            let has_neg = pair.positive.context.iter().any(|s| {
                let r = parse_sentence(s).unwrap();
                !r.is_fact()
                    && (!r.consequent.polarity || r.antecedents.iter().any(|a| !a.polarity))
            });
            assert!(has_neg, "{:?}", pair.positive.context);
        }
    }

    #[test]
    fn distractors_do_not_change_labels() {
        for scenario in Scenario::all() {
            for k in 0..25 {
                let pair = generate_example(scenario, 3, &Stream::new(100 + k)).unwrap();
                assert!(pair.distractors.len() >= 2);
                for &drop in &pair.distractors {
                    for ex in [&pair.positive, &pair.negative] {
                        let ctx: Vec<&String> = ex
                            .context
                            .iter()
                            .enumerate()
                            .filter(|(i, _)| *i != drop)
                            .map(|(_, s)| s)
                            .collect();
                        let kb = parse_context(&ctx).unwrap();
                        let q = parse_question(&ex.question).unwrap();
                        assert_eq!(answer(&kb, &q).unwrap().label, ex.label);
                    }
                }
            }
        }
    }

    #[test]
    fn vocab_exhausted_for_impossible_depth() {
        let err = generate_example(people(), 20, &Stream::new(0)).unwrap_err();
        assert!(matches!(
            err,
            DatagenError::VocabExhausted { depth: 20, .. }
        ));
    }

    #[test]
    fn zero_counts_give_empty_splits() {
        let spec = GenerationSpec::single_split(vec![people()], &[2, 3], SplitName::Train, 0, 0);
        let ds = generate_dataset(&spec).unwrap();
        assert_eq!(ds.len(), 3);
        assert!(ds.values().all(DatasetSplit::is_empty));
    }

    #[test]
    fn exact_counts_and_disjoint_ids() {
        let mut spec = GenerationSpec::single_split(
            Scenario::all().to_vec(),
            &[2, 5],
            SplitName::Train,
            11,
            3,
        );
        spec.counts.get_mut(&SplitName::Test).unwrap().insert(5, 4);
        let ds = generate_dataset(&spec).unwrap();
        let train = &ds[&SplitName::Train];
        assert_eq!(train.examples.iter().filter(|e| e.depth == 2).count(), 11);
        assert_eq!(train.examples.iter().filter(|e| e.depth == 5).count(), 11);
        assert_eq!(ds[&SplitName::Test].len(), 4);
        let ids: HashSet<&str> = ds
            .values()
            .flat_map(|s| s.examples.iter().map(|e| e.id.as_str()))
            .collect();
        assert_eq!(ids.len(), 26);
    }

    #[test]
    fn deterministic() {
        let spec =
            GenerationSpec::single_split(Scenario::all().to_vec(), &[3], SplitName::Dev, 20, 9);
        assert_eq!(
            generate_dataset(&spec).unwrap(),
            generate_dataset(&spec).unwrap()
        );
    }

    #[test]
    fn rejects_bad_specs() {
        let spec = GenerationSpec::single_split(vec![people()], &[1], SplitName::Train, 2, 0);
        assert!(matches!(
            generate_dataset(&spec),
            Err(DatagenError::InvalidSpec(_))
        ));
        let spec = GenerationSpec::single_split(vec![people()], &[], SplitName::Train, 2, 0);
        assert!(generate_dataset(&spec).is_err());
    }
}
