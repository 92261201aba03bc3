use crate::datagen::Example;
use crate::rng::Stream;

/// Permutes the context sentences of `example` with a Fisher-Yates shuffle
/// drawn from `Stream::new(seed)`. Question, label and depth are untouched.
pub fn shuffle_sentences(example: &Example, seed: u64) -> Example {
    let mut out = example.clone();
    Stream::new(seed).shuffle(&mut out.context);
    out
}

/// Seed for one shuffle, derived from a base seed and a path of tags
/// (e.g. epoch, batch, example id hash).
pub fn shuffle_seed(base: u64, tags: &[u64]) -> u64 {
    Stream::new(base).derive(tags).next_u64()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example(n: usize) -> Example {
        Example {
            id: "x".into(),
            context: (0..n).map(|i| format!("s{i}")).collect(),
            question: "q".into(),
            label: true,
            depth: 2,
        }
    }

    #[test]
    fn single_sentence_unchanged() {
        let e = example(1);
        assert_eq!(shuffle_sentences(&e, 42), e);
    }

    #[test]
    fn six_sentence_golden_permutation() {
        let e = example(6);
        let s = shuffle_sentences(&e, 0);
        let golden = include_str!("../../data/golden_shuffle_seed0.txt");
        let expected: Vec<&str> = golden.lines().collect();
        assert_eq!(s.context, expected);
        assert_eq!(
            (s.question, s.label, s.depth),
            (e.question, e.label, e.depth)
        );
    }
}
