//! Tokenization and pretrained word vectors.
//!
//! Vector files use the usual GloVe text layout: one `token v1 v2 ... vN`
//! line per word, single spaces, LF newlines. Tokens missing from the table
//! get a deterministic pseudo-random vector derived from the token text and
//! the table's `oov_seed`, uniform in `[-0.05, 0.05]`.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::nn::Tensor;
use crate::rng::{hash_str, mix64, Stream};

pub const DEFAULT_DIMENSION: usize = 100;
pub const OOV_SCALE: f64 = 0.05;

/// Bundled vectors covering the generator vocabulary (synthetic, 100-d).
pub const BUNDLED_FIXTURE: &str = include_str!("../data/mini_glove.100d.txt");

/// Environment variable naming a full pretrained vector file.
pub const EMBEDDINGS_ENV: &str = "NESY_EMBEDDINGS";

#[derive(Debug, thiserror::Error)]
pub enum EmbeddingError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: expected {expected} values, found {found}")]
    DimensionMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: bad number {text:?}")]
    BadNumber { line: usize, text: String },
}

/// Lowercased words of a sentence.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TokenSequence {
    pub tokens: Vec<String>,
}

impl TokenSequence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Lowercases, splits on whitespace and strips terminal `. , ? !`.
pub fn tokenize(text: &str) -> TokenSequence {
    let tokens = text
        .split_whitespace()
        .map(|w| w.trim_end_matches(['.', ',', '?', '!']).to_lowercase())
        .filter(|w| !w.is_empty())
        .collect();
    TokenSequence { tokens }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dimension: usize,
    vectors: HashMap<String, Vec<f64>>,
    pub oov_seed: u64,
    /// Lines whose token had already been seen (the later line wins).
    pub duplicate_warnings: usize,
}

impl EmbeddingTable {
    pub fn new(dimension: usize, oov_seed: u64) -> Self {
        Self {
            dimension,
            vectors: HashMap::new(),
            oov_seed,
            duplicate_warnings: 0,
        }
    }

    /// The small table shipped with the crate.
    pub fn bundled() -> Self {
        Self::parse(BufReader::new(BUNDLED_FIXTURE.as_bytes()), None)
            .expect("bundled fixture is well formed")
    }

    /// Loads from `$NESY_EMBEDDINGS` when set, else the bundled table.
    pub fn from_env_or_bundled() -> Result<Self, EmbeddingError> {
        match std::env::var_os(EMBEDDINGS_ENV) {
            Some(p) => load_embeddings(p),
            None => Ok(Self::bundled()),
        }
    }

    /// Parses vector lines. The dimension is `expected` if given, else the
    /// length of the first line (default 100 for an empty input).
    pub fn parse<R: BufRead>(input: R, expected: Option<usize>) -> Result<Self, EmbeddingError> {
        let mut table = Self::new(expected.unwrap_or(DEFAULT_DIMENSION), 0);
        let mut dim = expected;
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split(' ');
            let token = parts.next().unwrap_or_default().to_string();
            let values = parts
                .map(|t| match t.parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(v),
                    _ => Err(EmbeddingError::BadNumber {
                        line: i + 1,
                        text: t.to_string(),
                    }),
                })
                .collect::<Result<Vec<f64>, _>>()?;
            let expected = *dim.get_or_insert(values.len());
            if values.len() != expected || expected == 0 {
                return Err(EmbeddingError::DimensionMismatch {
                    line: i + 1,
                    expected,
                    found: values.len(),
                });
            }
            table.dimension = expected;
            if table.vectors.insert(token, values).is_some() {
                table.duplicate_warnings += 1;
            }
        }
        Ok(table)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.vectors.contains_key(token)
    }

    pub fn insert(&mut self, token: &str, vector: Vec<f64>) {
        assert_eq!(vector.len(), self.dimension, "vector dimension");
        assert!(vector.iter().all(|v| v.is_finite()), "non-finite vector");
        if self.vectors.insert(token.to_string(), vector).is_some() {
            self.duplicate_warnings += 1;
        }
    }

    /// Stored vector, or the token's deterministic OOV vector.
    pub fn vector(&self, token: &str) -> Vec<f64> {
        match self.vectors.get(token) {
            Some(v) => v.clone(),
            None => self.oov_vector(token),
        }
    }

    pub fn oov_vector(&self, token: &str) -> Vec<f64> {
        let mut s = Stream::new(mix64(hash_str(token) ^ mix64(self.oov_seed)));
        (0..self.dimension)
            .map(|_| s.uniform(-OOV_SCALE, OOV_SCALE))
            .collect()
    }

    /// `L × dimension` matrix whose row `i` embeds token `i`.
    pub fn embed(&self, tokens: &TokenSequence) -> Tensor {
        let mut data = Vec::with_capacity(tokens.len() * self.dimension);
        for t in &tokens.tokens {
            data.extend(self.vector(t));
        }
        Tensor::from_vec(vec![tokens.len(), self.dimension], data)
    }
}

impl EmbeddingTable {
    /// Writes the stored vectors in the text layout [`EmbeddingTable::parse`]
    /// reads, tokens sorted. Values use the shortest form that parses back
    /// to the same `f64`.
    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let mut tokens: Vec<&String> = self.vectors.keys().collect();
        tokens.sort();
        for t in tokens {
            out.write_all(t.as_bytes())?;
            for v in &self.vectors[t] {
                write!(out, " {v}")?;
            }
            out.write_all(b"\n")?;
        }
        out.flush()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        self.write(BufWriter::new(File::create(path)?))
    }
}

pub fn load_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingTable, EmbeddingError> {
    let file = File::open(path)?;
    EmbeddingTable::parse(BufReader::new(file), None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::vocab;

    fn toks(s: &str) -> Vec<String> {
        tokenize(s).tokens
    }

    #[test]
    fn tokenize_cases() {
        assert_eq!(toks("Anne is rough."), ["anne", "is", "rough"]);
        assert!(toks("").is_empty());
        assert_eq!(
            toks("The bald eagle sees the wolf."),
            ["the", "bald", "eagle", "sees", "the", "wolf"]
        );
        assert_eq!(
            toks("Is it true?  Yes, it is!"),
            ["is", "it", "true", "yes", "it", "is"]
        );
    }

    fn line(token: &str, n: usize) -> String {
        let vals: Vec<String> = (0..n).map(|i| format!("{}", i as f64 * 0.01)).collect();
        format!("{token} {}", vals.join(" "))
    }

    #[test]
    fn load_two_lines() {
        let text = format!("{}\n{}\n", line("anne", 100), line("rough", 100));
        let t = EmbeddingTable::parse(text.as_bytes(), None).unwrap();
        assert_eq!((t.len(), t.dimension()), (2, 100));
    }

    #[test]
    fn empty_file_is_empty_table() {
        let t = EmbeddingTable::parse("".as_bytes(), None).unwrap();
        assert!(t.is_empty());
        assert_eq!(t.dimension(), DEFAULT_DIMENSION);
        assert_eq!(t.embed(&tokenize("Anne is rough.")).shape(), &[3, 100]);
    }

    #[test]
    fn short_line_is_dimension_mismatch() {
        let text = format!(
            "{}\n{}\n{}\n",
            line("a", 100),
            line("b", 100),
            line("c", 99)
        );
        match EmbeddingTable::parse(text.as_bytes(), None) {
            Err(EmbeddingError::DimensionMismatch {
                line,
                expected,
                found,
            }) => {
                assert_eq!((line, expected, found), (3, 100, 99))
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn duplicates_last_wins() {
        let text = "a 1 2\nb 3 4\na 5 6\n";
        let t = EmbeddingTable::parse(text.as_bytes(), None).unwrap();
        assert_eq!(t.vector("a"), vec![5.0, 6.0]);
        assert_eq!(t.duplicate_warnings, 1);
    }

    #[test]
    fn bad_number() {
        assert!(matches!(
            EmbeddingTable::parse("a 1 x\n".as_bytes(), None),
            Err(EmbeddingError::BadNumber { line: 1, .. })
        ));
        assert!(EmbeddingTable::parse("a 1 NaN\n".as_bytes(), None).is_err());
    }

    #[test]
    fn embed_shapes_and_oov_determinism() {
        let t = EmbeddingTable::bundled();
        let m = t.embed(&tokenize("Anne is rough and nice."));
        assert_eq!(m.shape(), &[5, 100]);
        assert_eq!(t.embed(&TokenSequence::default()).shape(), &[0, 100]);
        assert!(!t.contains("zyzzyva"));
        let a = t.embed(&tokenize("zyzzyva zyzzyva"));
        assert_eq!(a.row(0), a.row(1));
        assert!(a.data().iter().all(|v| v.abs() <= OOV_SCALE));
        assert_ne!(t.oov_vector("zyzzyva"), t.oov_vector("quux"));
    }

    #[test]
    fn write_then_parse_is_exact() {
        let mut t = EmbeddingTable::new(3, 0);
        t.insert("b", vec![0.1, -2.5e-7, 1.0 / 3.0]);
        t.insert("a", vec![0.0, 7.0, -0.3]);
        let mut buf = Vec::new();
        t.write(&mut buf).unwrap();
        assert!(buf.starts_with(b"a 0 7 -0.3\n"));
        let back = EmbeddingTable::parse(buf.as_slice(), None).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn fixture_covers_generator_vocabulary() {
        let t = EmbeddingTable::bundled();
        assert_eq!(t.dimension(), 100);
        assert!(t.len() >= 150, "{}", t.len());
        let words = vocab::ANIMAL_NAMES
            .iter()
            .chain(&vocab::PEOPLE_NAMES)
            .chain(&vocab::ANIMAL_RELATIONS)
            .chain(&vocab::ANIMAL_ATTRIBUTES)
            .chain(&vocab::PEOPLE_ATTRIBUTES)
            .flat_map(|s| tokenize(s).tokens);
        for w in words {
            assert!(t.contains(&w), "{w} missing from fixture");
        }
        for v in t.vectors.values() {
            assert!(v.iter().all(|x| x.is_finite()));
        }
    }
}
