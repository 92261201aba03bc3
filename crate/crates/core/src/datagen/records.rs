//! Line-delimited JSON dataset records.
//!
//! One UTF-8 JSON object per line, LF-terminated, keys in this fixed order:
//!
//! ```text
//! {"id":"train-d2-000001","context":["Anne is rough.", ...],"question":"Anne is cold.","label":1,"depth":2}
//! ```
//!
//! `label` is `0` or `1`. Unknown or missing keys are rejected.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::DatagenError;

/// One (context, question, label, depth) sample.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Example {
    pub id: String,
    pub context: Vec<String>,
    pub question: String,
    #[serde(serialize_with = "label_out", deserialize_with = "label_in")]
    pub label: bool,
    pub depth: u32,
}

fn label_out<S: Serializer>(label: &bool, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_u8(u8::from(*label))
}

fn label_in<'de, D: Deserializer<'de>>(d: D) -> Result<bool, D::Error> {
    match u8::deserialize(d)? {
        0 => Ok(false),
        1 => Ok(true),
        other => Err(serde::de::Error::custom(format!(
            "label must be 0 or 1, got {other}"
        ))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SplitName {
    Train,
    Dev,
    Test,
}

impl SplitName {
    pub const ALL: [SplitName; 3] = [SplitName::Train, SplitName::Dev, SplitName::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            SplitName::Train => "train",
            SplitName::Dev => "dev",
            SplitName::Test => "test",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetSplit {
    pub name: SplitName,
    pub examples: Vec<Example>,
}

impl DatasetSplit {
    pub fn new(name: SplitName, examples: Vec<Example>) -> Self {
        Self { name, examples }
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }
}

pub fn write_examples<W: Write>(examples: &[Example], mut out: W) -> Result<(), DatagenError> {
    for ex in examples {
        serde_json::to_writer(&mut out, ex).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_records(split: &DatasetSplit, path: impl AsRef<Path>) -> Result<(), DatagenError> {
    let file = File::create(path)?;
    write_examples(&split.examples, BufWriter::new(file))
}

pub fn read_examples<R: BufRead>(input: R) -> Result<Vec<Example>, DatagenError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let ex: Example =
            serde_json::from_str(&line).map_err(|e| DatagenError::MalformedRecord {
                line: i + 1,
                message: e.to_string(),
            })?;
        out.push(ex);
    }
    Ok(out)
}

/// Reads a record file. The split name is taken from the caller.
pub fn read_records(path: impl AsRef<Path>, name: SplitName) -> Result<DatasetSplit, DatagenError> {
    let file = File::open(path)?;
    Ok(DatasetSplit::new(
        name,
        read_examples(BufReader::new(file))?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Example {
        Example {
            id: "train-d2-000000".into(),
            context: vec!["Anne is rough.".into(), "Rough people are young.".into()],
            question: "Anne is young.".into(),
            label: true,
            depth: 1,
        }
    }

    #[test]
    fn exact_field_layout() {
        let line = serde_json::to_string(&sample()).unwrap();
        assert_eq!(
            line,
            r#"{"id":"train-d2-000000","context":["Anne is rough.","Rough people are young."],"question":"Anne is young.","label":1,"depth":1}"#
        );
    }

    #[test]
    fn round_trip_through_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.jsonl");
        let mut other = sample();
        other.label = false;
        other.id = "b".into();
        let split = DatasetSplit::new(SplitName::Dev, vec![sample(), other]);
        write_records(&split, &path).unwrap();
        assert_eq!(read_records(&path, SplitName::Dev).unwrap(), split);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let text = format!(
            "{}\n{{\"id\":\"x\"}}\n",
            serde_json::to_string(&sample()).unwrap()
        );
        match read_examples(text.as_bytes()) {
            Err(DatagenError::MalformedRecord { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        let bad_label = r#"{"id":"a","context":[],"question":"q","label":2,"depth":1}"#;
        assert!(matches!(
            read_examples(bad_label.as_bytes()),
            Err(DatagenError::MalformedRecord { line: 1, .. })
        ));
        let extra = r#"{"id":"a","context":[],"question":"q","label":1,"depth":1,"x":0}"#;
        assert!(read_examples(extra.as_bytes()).is_err());
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(
            read_records("/nonexistent/nope.jsonl", SplitName::Test),
            Err(DatagenError::Io(_))
        ));
    }
}
