//! The controlled sentence grammar: parsing into [`Rule`]s and rendering back.
//!
//! Sentence forms (`E` entity, `A`/`B` attribute, `V` verb such as "likes"):
//!
//! | form        | example                                                  |
//! |-------------|----------------------------------------------------------|
//! | fact        | `Anne is rough.` `The tiger does not chase the bear.`    |
//! | generic     | `Rough people are young.` `Big animals are not kind.`    |
//! | universal   | `All young people are cold.`                             |
//! | conditional | `If someone is rough and nice then they are green.`      |
//! |             | `If something chases the tiger then it is not big.`      |
//! |             | `If Anne is green then Anne is blue.`                    |
//!
//! Rendering is canonical: for every rule built by the generator,
//! `parse(render(rule)) == rule` and `render(parse(s)) == s`.

use super::atom::{Atom, Indefinite, KnowledgeBase, Noun, Pattern, Phrasing, Rule, Term, IS};
use super::LogicError;
use crate::datagen::vocab;

const RESERVED: &[&str] = &[
    "is",
    "are",
    "not",
    "and",
    "then",
    "if",
    "all",
    "does",
    "do",
    "someone",
    "something",
    "they",
    "it",
    "the",
    "people",
    "animals",
    "things",
];

/// Known multi-word entity names and verbs. Attributes are open-class.
#[derive(Debug, Clone)]
pub struct Lexicon {
    /// (lowercased tokens, canonical name), longest first.
    entities: Vec<(Vec<String>, String)>,
    verbs: Vec<String>,
}

impl Default for Lexicon {
    fn default() -> Self {
        let names = vocab::ANIMAL_NAMES.iter().chain(vocab::PEOPLE_NAMES.iter());
        let verbs = vocab::ANIMAL_RELATIONS
            .iter()
            .chain(vocab::PEOPLE_RELATIONS.iter())
            .filter(|r| !r.starts_with("is"))
            .copied();
        Self::new(names.copied(), verbs)
    }
}

impl Lexicon {
    pub fn new<'a>(
        entities: impl IntoIterator<Item = &'a str>,
        verbs: impl IntoIterator<Item = &'a str>,
    ) -> Self {
        let mut entities: Vec<(Vec<String>, String)> = entities
            .into_iter()
            .map(|e| {
                let toks = e.split_whitespace().map(str::to_lowercase).collect();
                (toks, e.to_string())
            })
            .collect();
        entities.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then_with(|| a.1.cmp(&b.1)));
        let mut verbs: Vec<String> = verbs.into_iter().map(str::to_string).collect();
        verbs.sort();
        verbs.dedup();
        Self { entities, verbs }
    }

    fn is_verb(&self, word: &str) -> bool {
        self.verbs.iter().any(|v| v == word)
    }

    fn verb_from_base(&self, base: &str) -> Option<String> {
        self.verbs.iter().find(|v| base_form(v) == base).cloned()
    }
}

/// "likes" → "like", "sees" → "see".
pub fn base_form(verb: &str) -> &str {
    verb.strip_suffix('s').unwrap_or(verb)
}

fn is_attribute_word(w: &str) -> bool {
    !w.is_empty() && w.chars().all(|c| c.is_ascii_lowercase()) && !RESERVED.contains(&w)
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

fn decapitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_lowercase().chain(c).collect(),
        None => String::new(),
    }
}

// ---------------------------------------------------------------------------
// rendering

#[derive(Clone, Copy, PartialEq)]
enum Number {
    Singular,
    Plural,
}

fn render_predicate(p: &Pattern, number: Number, elide_is: bool) -> String {
    let not = if p.polarity { "" } else { "not " };
    if p.relation == IS {
        let verb = match number {
            Number::Singular => "is",
            Number::Plural => "are",
        };
        if elide_is {
            format!("{not}{}", p.object)
        } else {
            format!("{verb} {not}{}", p.object)
        }
    } else {
        let obj = &p.object;
        match (p.polarity, number) {
            (true, Number::Singular) => format!("{} {obj}", p.relation),
            (true, Number::Plural) => format!("{} {obj}", base_form(&p.relation)),
            (false, Number::Singular) => format!("does not {} {obj}", base_form(&p.relation)),
            (false, Number::Plural) => format!("do not {} {obj}", base_form(&p.relation)),
        }
    }
}

fn render_subject(t: &Term, pronoun: &str) -> String {
    match t {
        Term::Var => pronoun.to_string(),
        Term::Entity(e) => e.clone(),
    }
}

/// Renders a ground literal as a fact sentence (also the question form).
pub fn render_atom(atom: &Atom) -> String {
    let p = Pattern::ground(atom);
    capitalize(&format!(
        "{} {}.",
        atom.subject,
        render_predicate(&p, Number::Singular, false)
    ))
}

/// Renders a rule with its stored phrasing.
///
/// Panics if the phrasing cannot express the rule's shape (e.g. a generic
/// phrasing over a conjunction); generators only build expressible rules.
pub fn render_rule(rule: &Rule) -> String {
    match rule.phrasing {
        Phrasing::Fact => {
            assert!(rule.is_fact(), "fact phrasing on a rule");
            let Term::Entity(e) = &rule.consequent.subject else {
                panic!("fact with a variable subject")
            };
            capitalize(&format!(
                "{e} {}.",
                render_predicate(&rule.consequent, Number::Singular, false)
            ))
        }
        Phrasing::Generic(noun) | Phrasing::Universal(noun) => {
            assert!(
                rule.antecedents.len() == 1
                    && rule.antecedents[0].has_var()
                    && rule.antecedents[0].is_attribute()
                    && rule.antecedents[0].polarity
                    && rule.consequent.has_var()
                    && rule.consequent.is_attribute(),
                "generic phrasing needs a single affirmative attribute antecedent"
            );
            let head = format!(
                "{} {} {}.",
                rule.antecedents[0].object,
                noun.as_str(),
                render_predicate(&rule.consequent, Number::Plural, false)
            );
            match rule.phrasing {
                Phrasing::Universal(_) => format!("All {head}"),
                _ => capitalize(&head),
            }
        }
        Phrasing::Conditional(indef) => {
            assert!(
                !rule.antecedents.is_empty(),
                "conditional without antecedents"
            );
            let subject = &rule.antecedents[0].subject;
            assert!(
                rule.antecedents.iter().all(|a| &a.subject == subject),
                "conditional antecedents must share a subject"
            );
            let (indef_word, pronoun, number) = match indef {
                Some(Indefinite::Someone) => ("someone", "they", Number::Plural),
                Some(Indefinite::Something) => ("something", "it", Number::Singular),
                None => ("", "", Number::Singular),
            };
            let mut cond = render_subject(subject, indef_word);
            let mut prev_attr = false;
            for (i, a) in rule.antecedents.iter().enumerate() {
                if i > 0 {
                    cond.push_str(" and");
                }
                cond.push(' ');
                let elide = prev_attr && a.is_attribute();
                cond.push_str(&render_predicate(a, Number::Singular, elide));
                prev_attr = a.is_attribute();
            }
            let cons_number = match rule.consequent.subject {
                Term::Var => number,
                Term::Entity(_) => Number::Singular,
            };
            format!(
                "If {cond} then {} {}.",
                render_subject(&rule.consequent.subject, pronoun),
                render_predicate(&rule.consequent, cons_number, false)
            )
        }
    }
}

// ---------------------------------------------------------------------------
// parsing

struct Cursor<'a> {
    toks: &'a [&'a str],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<&'a str> {
        self.toks.get(self.pos).copied()
    }

    fn next(&mut self) -> Option<&'a str> {
        let t = self.peek();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, word: &str) -> bool {
        if self.peek() == Some(word) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn done(&self) -> bool {
        self.pos >= self.toks.len()
    }
}

struct Parser<'l> {
    lex: &'l Lexicon,
}

impl Parser<'_> {
    fn entity(&self, c: &mut Cursor) -> Option<String> {
        for (toks, canon) in &self.lex.entities {
            let end = c.pos + toks.len();
            if end <= c.toks.len()
                && c.toks[c.pos..end]
                    .iter()
                    .zip(toks)
                    .all(|(a, b)| a.to_lowercase() == *b)
            {
                // mid-sentence "The Tiger" is not a match; only a leading capital
                let exact = c.toks[c.pos..end]
                    .iter()
                    .zip(canon.split_whitespace())
                    .enumerate()
                    .all(|(i, (a, b))| *a == b || (i == 0 && c.pos == 0 && decapitalize(a) == b));
                if exact {
                    c.pos = end;
                    return Some(canon.clone());
                }
            }
        }
        // unknown proper name
        let t = c.peek()?;
        let mut chars = t.chars();
        let first = chars.next()?;
        if first.is_ascii_uppercase()
            && chars.all(|ch| ch.is_ascii_lowercase())
            && !RESERVED.contains(&t.to_lowercase().as_str())
        {
            c.pos += 1;
            return Some(t.to_string());
        }
        None
    }

    fn attribute(&self, c: &mut Cursor) -> Option<String> {
        let t = c.peek()?;
        if is_attribute_word(t) {
            c.pos += 1;
            Some(t.to_string())
        } else {
            None
        }
    }

    /// One predicate after a subject. `elide_ok` permits "and [not] A".
    fn predicate(
        &self,
        c: &mut Cursor,
        subject: &Term,
        number: Number,
        elide_ok: bool,
    ) -> Option<Pattern> {
        let mk = |relation: String, object: String, polarity: bool| Pattern {
            subject: subject.clone(),
            relation,
            object,
            polarity,
        };
        let be = match number {
            Number::Singular => "is",
            Number::Plural => "are",
        };
        let aux = match number {
            Number::Singular => "does",
            Number::Plural => "do",
        };
        if c.eat(be) {
            let polarity = !c.eat("not");
            let a = self.attribute(c)?;
            return Some(mk(IS.to_string(), a, polarity));
        }
        if c.eat(aux) {
            if !c.eat("not") {
                return None;
            }
            let verb = self.lex.verb_from_base(c.next()?)?;
            let obj = self.entity(c)?;
            return Some(mk(verb, obj, false));
        }
        let t = c.peek()?;
        let verb = match number {
            Number::Singular if self.lex.is_verb(t) => Some(t.to_string()),
            Number::Plural => self.lex.verb_from_base(t),
            _ => None,
        };
        if let Some(verb) = verb {
            c.pos += 1;
            let obj = self.entity(c)?;
            return Some(mk(verb, obj, true));
        }
        if elide_ok {
            let polarity = !c.eat("not");
            let a = self.attribute(c)?;
            return Some(mk(IS.to_string(), a, polarity));
        }
        None
    }

    fn fact(&self, c: &mut Cursor) -> Option<Rule> {
        let e = self.entity(c)?;
        let subject = Term::Entity(e);
        let p = self.predicate(c, &subject, Number::Singular, false)?;
        c.done().then(|| Rule {
            antecedents: Vec::new(),
            consequent: p,
            phrasing: Phrasing::Fact,
        })
    }

    fn generic(&self, c: &mut Cursor, universal: bool) -> Option<Rule> {
        if universal && !c.eat("All") {
            return None;
        }
        let first = c.next()?;
        let a = if universal {
            first.to_string()
        } else {
            decapitalize(first)
        };
        if !is_attribute_word(&a) {
            return None;
        }
        let noun = Noun::parse(c.next()?)?;
        let cons = self.predicate(c, &Term::Var, Number::Plural, false)?;
        if !cons.is_attribute() || !c.done() {
            return None;
        }
        Some(Rule {
            antecedents: vec![Pattern::var_attribute(&a, true)],
            consequent: cons,
            phrasing: if universal {
                Phrasing::Universal(noun)
            } else {
                Phrasing::Generic(noun)
            },
        })
    }

    fn conditional(&self, c: &mut Cursor) -> Option<Rule> {
        if !c.eat("If") {
            return None;
        }
        let (subject, indef) = if c.eat("someone") {
            (Term::Var, Some(Indefinite::Someone))
        } else if c.eat("something") {
            (Term::Var, Some(Indefinite::Something))
        } else {
            (Term::Entity(self.entity(c)?), None)
        };
        let mut antecedents = Vec::new();
        loop {
            let elide_ok = antecedents.last().is_some_and(Pattern::is_attribute);
            antecedents.push(self.predicate(c, &subject, Number::Singular, elide_ok)?);
            if c.eat("then") {
                break;
            }
            if !c.eat("and") {
                return None;
            }
        }
        let (cons_subject, number) = match indef {
            Some(Indefinite::Someone) if c.eat("they") => (Term::Var, Number::Plural),
            Some(Indefinite::Something) if c.eat("it") => (Term::Var, Number::Singular),
            _ => (Term::Entity(self.entity(c)?), Number::Singular),
        };
        let consequent = self.predicate(c, &cons_subject, number, false)?;
        c.done().then_some(Rule {
            antecedents,
            consequent,
            phrasing: Phrasing::Conditional(indef),
        })
    }
}

fn tokens(sentence: &str) -> Vec<&str> {
    let s = sentence.trim();
    let s = s.strip_suffix('.').unwrap_or(s);
    s.split_whitespace().collect()
}

/// Parses one context sentence with the default lexicon.
pub fn parse_sentence(sentence: &str) -> Result<Rule, LogicError> {
    parse_sentence_with(&Lexicon::default(), sentence)
}

pub fn parse_sentence_with(lex: &Lexicon, sentence: &str) -> Result<Rule, LogicError> {
    let toks = tokens(sentence);
    let p = Parser { lex };
    let attempts: [(&'static str, fn(&Parser, &mut Cursor) -> Option<Rule>); 4] = [
        ("conditional", |p, c| p.conditional(c)),
        ("universal", |p, c| p.generic(c, true)),
        ("generic", |p, c| p.generic(c, false)),
        ("fact", |p, c| p.fact(c)),
    ];
    let mut tried = Vec::new();
    for (name, f) in attempts {
        tried.push(name);
        let mut c = Cursor {
            toks: &toks,
            pos: 0,
        };
        if let Some(rule) = f(&p, &mut c) {
            return Ok(rule);
        }
    }
    Err(LogicError::UnparseableSentence {
        sentence: sentence.to_string(),
        tried,
    })
}

/// Parses a whole context, preserving sentence order.
pub fn parse_context<S: AsRef<str>>(sentences: &[S]) -> Result<KnowledgeBase, LogicError> {
    parse_context_with(&Lexicon::default(), sentences)
}

pub fn parse_context_with<S: AsRef<str>>(
    lex: &Lexicon,
    sentences: &[S],
) -> Result<KnowledgeBase, LogicError> {
    let items = sentences
        .iter()
        .map(|s| parse_sentence_with(lex, s.as_ref()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(KnowledgeBase::new(items))
}

/// Parses a question, which must have the shape of a fact sentence.
pub fn parse_question(sentence: &str) -> Result<Atom, LogicError> {
    parse_question_with(&Lexicon::default(), sentence)
}

pub fn parse_question_with(lex: &Lexicon, sentence: &str) -> Result<Atom, LogicError> {
    let toks = tokens(sentence);
    let p = Parser { lex };
    let mut c = Cursor {
        toks: &toks,
        pos: 0,
    };
    match p.fact(&mut c) {
        Some(rule) => Ok(rule.consequent.instantiate("")),
        None => Err(LogicError::UnparseableSentence {
            sentence: sentence.to_string(),
            tried: vec!["fact"],
        }),
    }
}
