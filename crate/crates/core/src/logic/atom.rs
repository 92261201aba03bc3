use std::collections::BTreeSet;
use std::fmt;

/// Attribute statements use this relation; every other relation is a verb
/// whose object is an entity.
pub const IS: &str = "is";

/// A ground literal: `subject relation object`, possibly negated.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub subject: String,
    pub relation: String,
    pub object: String,
    pub polarity: bool,
}

impl Atom {
    pub fn new(subject: &str, relation: &str, object: &str, polarity: bool) -> Self {
        Self {
            subject: subject.to_string(),
            relation: relation.to_string(),
            object: object.to_string(),
            polarity,
        }
    }

    pub fn attribute(subject: &str, attribute: &str, polarity: bool) -> Self {
        Self::new(subject, IS, attribute, polarity)
    }

    pub fn negated(&self) -> Self {
        Self {
            polarity: !self.polarity,
            ..self.clone()
        }
    }

    pub fn affirmative(&self) -> Self {
        Self {
            polarity: true,
            ..self.clone()
        }
    }

    pub fn is_attribute(&self) -> bool {
        self.relation == IS
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let neg = if self.polarity { "" } else { "¬" };
        write!(
            f,
            "{neg}{}({}, {})",
            self.relation, self.subject, self.object
        )
    }
}

/// Subject position of a rule literal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    /// The rule's single universally quantified variable ("someone" / "they").
    Var,
    Entity(String),
}

impl Term {
    pub fn bind<'a>(&'a self, value: &'a str) -> &'a str {
        match self {
            Term::Var => value,
            Term::Entity(e) => e,
        }
    }
}

/// A literal that may mention the rule variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Pattern {
    pub subject: Term,
    pub relation: String,
    pub object: String,
    pub polarity: bool,
}

impl Pattern {
    pub fn var_attribute(attribute: &str, polarity: bool) -> Self {
        Self {
            subject: Term::Var,
            relation: IS.to_string(),
            object: attribute.to_string(),
            polarity,
        }
    }

    pub fn ground(atom: &Atom) -> Self {
        Self {
            subject: Term::Entity(atom.subject.clone()),
            relation: atom.relation.clone(),
            object: atom.object.clone(),
            polarity: atom.polarity,
        }
    }

    pub fn has_var(&self) -> bool {
        self.subject == Term::Var
    }

    pub fn is_attribute(&self) -> bool {
        self.relation == IS
    }

    pub fn instantiate(&self, value: &str) -> Atom {
        Atom {
            subject: self.subject.bind(value).to_string(),
            relation: self.relation.clone(),
            object: self.object.clone(),
            polarity: self.polarity,
        }
    }
}

/// Plural noun used by the generic rule phrasings ("Rough people are young").
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Noun {
    People,
    Animals,
    Things,
}

impl Noun {
    pub fn as_str(self) -> &'static str {
        match self {
            Noun::People => "people",
            Noun::Animals => "animals",
            Noun::Things => "things",
        }
    }

    pub fn parse(word: &str) -> Option<Self> {
        match word {
            "people" => Some(Noun::People),
            "animals" => Some(Noun::Animals),
            "things" => Some(Noun::Things),
            _ => None,
        }
    }
}

/// Indefinite pronoun of a conditional rule; fixes the pronoun of the consequent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Indefinite {
    /// "someone ... they are"
    Someone,
    /// "something ... it is"
    Something,
}

/// Surface form a rule is rendered with. Carries no logical meaning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phrasing {
    Fact,
    /// "Rough people are young."
    Generic(Noun),
    /// "All young people are cold."
    Universal(Noun),
    /// "If someone is rough and nice then they are green." The pronoun is
    /// `None` when no literal mentions the variable.
    Conditional(Option<Indefinite>),
}

/// An implication `antecedents ⇒ consequent`; a fact when there are no antecedents.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rule {
    pub antecedents: Vec<Pattern>,
    pub consequent: Pattern,
    pub phrasing: Phrasing,
}

impl Rule {
    pub fn fact(atom: &Atom) -> Self {
        Self {
            antecedents: Vec::new(),
            consequent: Pattern::ground(atom),
            phrasing: Phrasing::Fact,
        }
    }

    pub fn is_fact(&self) -> bool {
        self.antecedents.is_empty()
    }

    pub fn has_var(&self) -> bool {
        self.consequent.has_var() || self.antecedents.iter().any(Pattern::has_var)
    }

    /// Entities named explicitly by the rule.
    pub fn entities(&self) -> impl Iterator<Item = &str> {
        self.antecedents
            .iter()
            .chain(std::iter::once(&self.consequent))
            .flat_map(|p| {
                let subj = match &p.subject {
                    Term::Entity(e) => Some(e.as_str()),
                    Term::Var => None,
                };
                let obj = (!p.is_attribute()).then_some(p.object.as_str());
                subj.into_iter().chain(obj)
            })
    }
}

/// An ordered context of facts and rules over a closed entity universe.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct KnowledgeBase {
    pub items: Vec<Rule>,
    pub entity_universe: BTreeSet<String>,
}

impl KnowledgeBase {
    pub fn new(items: Vec<Rule>) -> Self {
        let entity_universe = items
            .iter()
            .flat_map(|r| r.entities().map(str::to_string))
            .collect();
        Self {
            items,
            entity_universe,
        }
    }

    pub fn facts(&self) -> impl Iterator<Item = &Rule> {
        self.items.iter().filter(|r| r.is_fact())
    }

    pub fn rules(&self) -> impl Iterator<Item = &Rule> {
        self.items.iter().filter(|r| !r.is_fact())
    }

    pub fn push(&mut self, rule: Rule) {
        self.entity_universe
            .extend(rule.entities().map(str::to_string));
        self.items.push(rule);
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}
