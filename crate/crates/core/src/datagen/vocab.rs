//! Entity, relation and attribute inventories of the two dataset categories.

pub const ANIMAL_NAMES: [&str; 14] = [
    "the bald eagle",
    "the tiger",
    "the bear",
    "the lion",
    "the wolf",
    "the crocodile",
    "the dinosaur",
    "the snake",
    "the leopard",
    "the cat",
    "the dog",
    "the mouse",
    "the rabbit",
    "the squirrel",
];

pub const PEOPLE_NAMES: [&str; 9] = [
    "Anne", "Alan", "Bob", "Charlie", "Dave", "Erin", "Harry", "Gary", "Fiona",
];

/// "is not" is the negated form of "is"; in the logic it is a polarity flag.
pub const ANIMAL_RELATIONS: [&str; 8] = [
    "is", "is not", "likes", "chases", "needs", "visits", "attacks", "sees",
];

pub const PEOPLE_RELATIONS: [&str; 2] = ["is", "is not"];

pub const ANIMAL_ATTRIBUTES: [&str; 20] = [
    "kind",
    "quiet",
    "round",
    "nice",
    "smart",
    "dull",
    "rough",
    "lazy",
    "slow",
    "sleepy",
    "furry",
    "small",
    "cute",
    "lovely",
    "beautiful",
    "big",
    "strong",
    "awful",
    "fierce",
    "heavy",
];

pub const PEOPLE_ATTRIBUTES: [&str; 20] = [
    "big", "strong", "high", "huge", "short", "thin", "small", "little", "wealthy", "smart",
    "nice", "quiet", "kind", "poor", "dull", "rough", "bad", "sad", "old", "young",
];

/// Verb relations (everything except "is" / "is not").
pub fn verbs(relations: &[&'static str]) -> Vec<&'static str> {
    relations
        .iter()
        .copied()
        .filter(|r| !r.starts_with("is"))
        .collect()
}
