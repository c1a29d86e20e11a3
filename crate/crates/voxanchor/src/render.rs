//! Report files and their text rendering.

use std::fmt::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use voxanchor_core::eval::EvalReport;
use voxanchor_core::forest::TrainedForest;

use crate::error::{Error, Result};
use crate::formats::{read_text, write_text};

/// Contents of `report.json`: one report per evaluated strategy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportFile {
    pub reports: Vec<EvalReport>,
}

impl ReportFile {
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self).map_err(|e| Error::Internal(e.to_string()))?;
        text.push('\n');
        write_text(path, &text)
    }

    pub fn load(path: &Path) -> Result<ReportFile> {
        let text = read_text(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Parse { path: path.to_path_buf(), line: e.line() as u64, msg: e.to_string() })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Auc,
    F1,
    Precision,
    Recall,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::Auc, Metric::F1, Metric::Precision, Metric::Recall];

    fn title(self) -> &'static str {
        match self {
            Metric::Auc => "AUC",
            Metric::F1 => "F1",
            Metric::Precision => "precision",
            Metric::Recall => "recall",
        }
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Metric> {
        match s.trim().to_ascii_lowercase().as_str() {
            "auc" => Ok(Metric::Auc),
            "f1" => Ok(Metric::F1),
            "precision" => Ok(Metric::Precision),
            "recall" => Ok(Metric::Recall),
            other => Err(Error::Usage(format!("unknown metric {other:?}; expected auc, f1, precision or recall"))),
        }
    }
}

/// Comma-separated metric list; empty means all.
pub fn parse_metrics(spec: Option<&str>) -> Result<Vec<Metric>> {
    match spec {
        None => Ok(Metric::ALL.to_vec()),
        Some(s) => {
            let mut out: Vec<Metric> = Vec::new();
            for part in s.split(',').filter(|p| !p.trim().is_empty()) {
                let m: Metric = part.parse()?;
                if !out.contains(&m) {
                    out.push(m);
                }
            }
            if out.is_empty() {
                return Err(Error::Usage("--metrics lists no metric".into()));
            }
            Ok(out)
        }
    }
}

const CELL: usize = 13;

/// Per-participant mean ± SD of each strategy, then the same by note type
/// when notes carry types.
pub fn render(file: &ReportFile, metrics: &[Metric]) -> String {
    let mut s = String::new();
    let _ = write!(s, "{:<10} {:<8} {:>5}", "strategy", "cv", "folds");
    for m in metrics {
        let _ = write!(s, "  {:<CELL$}", m.title());
    }
    s.push('\n');
    for r in &file.reports {
        let _ = write!(s, "{:<10} {:<8} {:>5}", r.strategy, r.protocol.to_string(), r.folds);
        for m in metrics {
            let cell = match m {
                Metric::Auc => r.auc.to_string(),
                Metric::F1 => r.f1.to_string(),
                Metric::Precision => r.precision.to_string(),
                Metric::Recall => r.recall.to_string(),
            };
            let _ = write!(s, "  {cell:<CELL$}");
        }
        s.push('\n');
    }

    let typed: Vec<Metric> = metrics.iter().copied().filter(|m| matches!(m, Metric::Auc | Metric::F1)).collect();
    if !typed.is_empty() && file.reports.iter().any(|r| !r.per_type.is_empty()) {
        s.push('\n');
        let _ = write!(s, "{:<10} {:<10} {:>5}", "note type", "strategy", "notes");
        for m in &typed {
            let _ = write!(s, "  {:<CELL$}", m.title());
        }
        s.push('\n');
        for r in &file.reports {
            for t in &r.per_type {
                let _ = write!(s, "{:<10} {:<10} {:>5}", t.note_type.as_str(), r.strategy, t.notes);
                for m in &typed {
                    let cell = if *m == Metric::Auc { t.auc.to_string() } else { t.f1.to_string() };
                    let _ = write!(s, "  {cell:<CELL$}");
                }
                s.push('\n');
            }
        }
    }

    for r in &file.reports {
        if r.auc_skipped > 0 {
            let _ = writeln!(s, "{}: AUC skipped for {} single-class participant(s)", r.strategy, r.auc_skipped);
        }
        for w in &r.warnings {
            let _ = writeln!(s, "{}: {w}", r.strategy);
        }
    }
    s
}

pub fn render_importances(model: &TrainedForest) -> String {
    let mut s = String::from("feature                         importance\n");
    for (name, v) in model.feature_importance() {
        let _ = writeln!(s, "{name:<30}  {v:.4}");
    }
    s
}
