//! Plain-text parameter container.
//!
//! ```text
//! nesy-checkpoint v1
//! header <key> <value>
//! tensor <name> <ndim> <d0> <d1> ...
//! <row-major values, space separated, shortest round-trip decimal>
//! end
//! ```
//!
//! Values are written with Rust's shortest exact representation, so a
//! write/read cycle reproduces every `f64` bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{NnError, Tensor};

const MAGIC: &str = "nesy-checkpoint v1";

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Checkpoint {
    pub header: Vec<(String, String)>,
    pub tensors: Vec<(String, Tensor)>,
}

impl Checkpoint {
    pub fn header_value(&self, key: &str) -> Option<&str> {
        self.header
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(MAGIC);
        out.push('\n');
        for (k, v) in &self.header {
            let _ = writeln!(out, "header {k} {v}");
        }
        for (name, t) in &self.tensors {
            let dims: Vec<String> = t.shape().iter().map(|d| d.to_string()).collect();
            let _ = writeln!(out, "tensor {name} {} {}", t.shape().len(), dims.join(" "));
            let vals: Vec<String> = t.data().iter().map(|v| format!("{v:?}")).collect();
            out.push_str(&vals.join(" "));
            out.push('\n');
        }
        out.push_str("end\n");
        out
    }

    pub fn from_text(text: &str) -> Result<Self, NnError> {
        let bad = |line: usize, msg: &str| NnError::MalformedCheckpoint {
            line,
            message: msg.to_string(),
        };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        match lines.next() {
            Some((_, l)) if l == MAGIC => {}
            _ => return Err(bad(1, "missing magic line")),
        }
        let mut ck = Checkpoint::default();
        while let Some((n, line)) = lines.next() {
            if line == "end" {
                return Ok(ck);
            }
            if let Some(rest) = line.strip_prefix("header ") {
                let (k, v) = rest.split_once(' ').unwrap_or((rest, ""));
                ck.header.push((k.to_string(), v.to_string()));
            } else if let Some(rest) = line.strip_prefix("tensor ") {
                let mut parts = rest.split(' ');
                let name = parts.next().ok_or_else(|| bad(n, "tensor name"))?;
                let ndim: usize = parts
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| bad(n, "tensor rank"))?;
                let shape: Vec<usize> = parts
                    .map(|s| s.parse().map_err(|_| bad(n, "tensor dims")))
                    .collect::<Result<_, _>>()?;
                if shape.len() != ndim {
                    return Err(bad(n, "rank does not match dims"));
                }
                let (vn, vline) = lines.next().ok_or_else(|| bad(n + 1, "missing values"))?;
                let data: Vec<f64> = if vline.is_empty() {
                    Vec::new()
                } else {
                    vline
                        .split(' ')
                        .map(|s| s.parse().map_err(|_| bad(vn, "bad value")))
                        .collect::<Result<_, _>>()?
                };
                if data.len() != shape.iter().product::<usize>() {
                    return Err(bad(vn, "value count does not match shape"));
                }
                ck.tensors
                    .push((name.to_string(), Tensor::from_vec(shape, data)));
            } else {
                return Err(bad(n, "unexpected line"));
            }
        }
        Err(bad(text.lines().count() + 1, "missing end marker"))
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<(), NnError> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self, NnError> {
        Self::from_text(&fs::read_to_string(path)?)
    }
}
