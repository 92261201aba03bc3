//! Metrics reports: a JSON document plus a flat TSV table.
//!
//! The TSV has the fixed header `condition depth n_total n_correct accuracy`
//! and, per condition, one row per depth followed by an `all` row. Depths
//! missing from a condition appear with zero counts so every condition has
//! the same rows.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Cell, History, Metrics};

pub const TSV_HEADER: &str = "condition\tdepth\tn_total\tn_correct\taccuracy";

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad report JSON: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub n_total: usize,
    pub n_correct: usize,
    pub accuracy: f64,
}

impl From<Cell> for CellReport {
    fn from(c: Cell) -> Self {
        Self {
            n_total: c.n_total,
            n_correct: c.n_correct,
            accuracy: c.accuracy(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub condition: String,
    pub overall: CellReport,
    pub by_depth: BTreeMap<u32, CellReport>,
}

impl Condition {
    pub fn new(name: &str, m: &Metrics) -> Self {
        Self {
            condition: name.to_string(),
            overall: m.overall.into(),
            by_depth: m.by_depth.iter().map(|(d, c)| (*d, (*c).into())).collect(),
        }
    }

    pub fn metrics(&self) -> Metrics {
        let cell = |c: &CellReport| Cell {
            n_total: c.n_total,
            n_correct: c.n_correct,
        };
        Metrics {
            overall: cell(&self.overall),
            by_depth: self.by_depth.iter().map(|(d, c)| (*d, cell(c))).collect(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub conditions: Vec<Condition>,
    pub epoch_losses: Vec<f64>,
    pub dev_accuracy: Vec<f64>,
    pub best_dev_epoch: Option<usize>,
    /// Free-form provenance (config echo, seeds, paths).
    pub notes: BTreeMap<String, String>,
}

impl Report {
    pub fn with_history(history: &History) -> Self {
        Self {
            epoch_losses: history.epoch_losses.clone(),
            dev_accuracy: history.dev_accuracy.clone(),
            best_dev_epoch: history.best_dev_epoch,
            ..Self::default()
        }
    }

    pub fn add(&mut self, name: &str, metrics: &Metrics) -> &mut Self {
        self.conditions.push(Condition::new(name, metrics));
        self
    }

    pub fn note(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.notes.insert(key.to_string(), value.to_string());
        self
    }

    pub fn depths(&self) -> BTreeSet<u32> {
        self.conditions
            .iter()
            .flat_map(|c| c.by_depth.keys().copied())
            .collect()
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from(TSV_HEADER);
        out.push('\n');
        let depths = self.depths();
        let empty = CellReport::from(Cell::default());
        for c in &self.conditions {
            let rows = depths
                .iter()
                .map(|d| (d.to_string(), c.by_depth.get(d).unwrap_or(&empty)))
                .chain(std::iter::once(("all".to_string(), &c.overall)));
            for (depth, cell) in rows {
                let _ = writeln!(
                    out,
                    "{}\t{depth}\t{}\t{}\t{}",
                    c.condition, cell.n_total, cell.n_correct, cell.accuracy
                );
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }
}

/// The TSV companion of a JSON report path.
pub fn tsv_path(json_path: &Path) -> PathBuf {
    json_path.with_extension("tsv")
}

/// Writes `path` (JSON) and [`tsv_path`]`(path)`. Returns both paths.
pub fn emit_report(
    report: &Report,
    path: impl AsRef<Path>,
) -> Result<(PathBuf, PathBuf), ReportError> {
    let json = path.as_ref().to_path_buf();
    let tsv = tsv_path(&json);
    if let Some(dir) = json.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(&json, report.to_json())?;
    fs::write(&tsv, report.to_tsv())?;
    Ok((json, tsv))
}

pub fn read_report(path: impl AsRef<Path>) -> Result<Report, ReportError> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn metrics() -> Metrics {
        Metrics::from_outcomes([(2, true), (2, false), (3, true), (3, true), (3, false)])
    }

    #[test]
    fn empty_report_is_header_only() {
        assert_eq!(Report::default().to_tsv(), format!("{TSV_HEADER}\n"));
    }

    #[test]
    fn row_count_and_round_trip() {
        let mut r = Report::with_history(&History {
            epoch_losses: vec![0.6931471805599453, 0.1 + 0.2],
            dev_accuracy: vec![0.5, 2.0 / 3.0],
            best_dev_epoch: Some(1),
            context_digests: vec![],
        });
        r.add("original", &metrics());
        r.add("shuffled", &Metrics::from_outcomes([(2, true)]));
        r.note("seed", 0);
        let tsv = r.to_tsv();
        // (2 depths + overall) x 2 conditions, plus the header
        assert_eq!(tsv.lines().count(), 1 + 3 * 2);
        assert!(tsv.contains("original\t3\t3\t2\t0.6666666666666666\n"));
        assert!(tsv.contains("shuffled\t3\t0\t0\t0\n"));
        assert!(tsv.contains("original\tall\t5\t3\t0.6\n"));
        let dir = tempfile::tempdir().unwrap();
        let (json, tsv_file) = emit_report(&r, dir.path().join("sub/report.json")).unwrap();
        let back = read_report(&json).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.conditions[0].metrics(), metrics());
        assert_eq!(fs::read_to_string(tsv_file).unwrap(), tsv);
        for c in &back.conditions {
            for cell in c.by_depth.values().chain([&c.overall]) {
                assert_eq!(
                    cell.accuracy,
                    Cell {
                        n_total: cell.n_total,
                        n_correct: cell.n_correct
                    }
                    .accuracy()
                );
            }
        }
    }
}
