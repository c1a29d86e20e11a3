//! Cross-validation protocols and evaluation reports.
//!
//! Headline metrics are computed per participant (over all of that
//! participant's held-out rows) and then averaged across participants.
//! Pooled metrics over every row are reported alongside for diagnostics.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::features::{PassageFeatureVector, N_FEATURES};
use crate::forest::{train_forest_xy, ForestConfig, TrainedForest, DECISION_THRESHOLD};
use crate::metrics::{precision_recall_f1, roc_auc};
use crate::types::NoteType;

/// A labeled feature vector with its grouping keys.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub participant_id: String,
    pub note_type: Option<NoteType>,
    pub vector: PassageFeatureVector,
}

impl FeatureRow {
    pub fn truth(&self) -> Option<bool> {
        self.vector.label.as_bool()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Protocol {
    /// Leave one participant out (person-independent).
    #[cfg_attr(feature = "serde", serde(rename = "lopo"))]
    LeaveOneParticipantOut,
    /// Leave one note out within each participant (person-dependent).
    #[cfg_attr(feature = "serde", serde(rename = "loo"))]
    LeaveOneNoteOut,
    /// No training involved; scores evaluated as given.
    #[cfg_attr(feature = "serde", serde(rename = "none"))]
    Direct,
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Protocol::LeaveOneParticipantOut => "lopo",
            Protocol::LeaveOneNoteOut => "loo",
            Protocol::Direct => "none",
        })
    }
}

/// Row indices of one train/test split.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub held_out: String,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

pub fn lopo_folds(rows: &[FeatureRow]) -> Result<Vec<Fold>> {
    let participants: BTreeSet<&str> = rows.iter().map(|r| r.participant_id.as_str()).collect();
    if participants.len() < 2 {
        return Err(Error::TooFewParticipants);
    }
    Ok(participants
        .into_iter()
        .map(|p| {
            let (test, train): (Vec<usize>, Vec<usize>) = (0..rows.len()).partition(|&i| rows[i].participant_id == p);
            Fold { held_out: p.into(), train, test }
        })
        .collect())
}

/// One fold per (participant, note); training rows come from the same
/// participant's other notes only.
pub fn loo_note_folds(rows: &[FeatureRow]) -> Result<Vec<Fold>> {
    let mut notes: BTreeMap<&str, BTreeSet<u32>> = BTreeMap::new();
    for r in rows {
        notes.entry(&r.participant_id).or_default().insert(r.vector.note_id);
    }
    let mut folds = Vec::new();
    for (participant, ids) in &notes {
        if ids.len() < 2 {
            return Err(Error::TooFewNotes((*participant).into()));
        }
        for &note in ids {
            let mut train = Vec::new();
            let mut test = Vec::new();
            for (i, r) in rows.iter().enumerate() {
                if r.participant_id != *participant {
                    continue;
                }
                if r.vector.note_id == note {
                    test.push(i);
                } else {
                    train.push(i);
                }
            }
            folds.push(Fold { held_out: format!("{participant}/{note}"), train, test });
        }
    }
    Ok(folds)
}

fn labeled_xy(rows: &[FeatureRow], idx: &[usize]) -> Result<(Vec<[f64; N_FEATURES]>, Vec<bool>)> {
    let mut x = Vec::with_capacity(idx.len());
    let mut y = Vec::with_capacity(idx.len());
    for &i in idx {
        x.push(rows[i].vector.features);
        y.push(rows[i].truth().ok_or(Error::UnlabeledRow(i))?);
    }
    Ok((x, y))
}

/// Training matrix of a fold.
pub fn fold_training_data(rows: &[FeatureRow], fold: &Fold) -> Result<(Vec<[f64; N_FEATURES]>, Vec<bool>)> {
    labeled_xy(rows, &fold.train)
}

/// Scores the held-out rows of a fold with a trained model.
pub fn score_fold(rows: &[FeatureRow], fold: &Fold, model: &TrainedForest) -> Vec<f64> {
    fold.test.iter().map(|&i| model.predict_proba(&rows[i].vector.features)).collect()
}

/// Trains on a fold and scores its held-out rows.
pub fn fit_and_score(rows: &[FeatureRow], fold: &Fold, cfg: &ForestConfig) -> Result<Vec<f64>> {
    let (x, y) = fold_training_data(rows, fold)?;
    let model = train_forest_xy(&x, &y, cfg)?;
    Ok(score_fold(rows, fold, &model))
}

/// Scatters per-fold scores back to row order.
pub fn collect_scores(n_rows: usize, folds: &[Fold], fold_scores: &[Vec<f64>]) -> Vec<f64> {
    let mut out = alloc::vec![f64::NAN; n_rows];
    for (fold, scores) in folds.iter().zip(fold_scores) {
        for (&i, &s) in fold.test.iter().zip(scores) {
            out[i] = s;
        }
    }
    out
}

pub fn lopo_cv(rows: &[FeatureRow], cfg: &ForestConfig) -> Result<EvalReport> {
    let folds = lopo_folds(rows)?;
    run_sequential(rows, &folds, cfg, Protocol::LeaveOneParticipantOut)
}

pub fn loo_note_cv(rows: &[FeatureRow], cfg: &ForestConfig) -> Result<EvalReport> {
    let folds = loo_note_folds(rows)?;
    run_sequential(rows, &folds, cfg, Protocol::LeaveOneNoteOut)
}

fn run_sequential(rows: &[FeatureRow], folds: &[Fold], cfg: &ForestConfig, protocol: Protocol) -> Result<EvalReport> {
    let fold_scores = folds.iter().map(|f| fit_and_score(rows, f, cfg)).collect::<Result<Vec<_>>>()?;
    let scores = collect_scores(rows.len(), folds, &fold_scores);
    let predicted: Vec<bool> = scores.iter().map(|&s| s >= DECISION_THRESHOLD).collect();
    build_report("learned", protocol, folds.len(), rows, &scores, &predicted)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MeanSd {
    pub mean: f64,
    /// Sample standard deviation; 0 for fewer than two values.
    pub sd: f64,
    pub n: usize,
}

impl MeanSd {
    pub fn of(values: &[f64]) -> MeanSd {
        let n = values.len();
        if n == 0 {
            return MeanSd::default();
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let sd = if n < 2 {
            0.0
        } else {
            libm::sqrt(values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64)
        };
        MeanSd { mean, sd, n }
    }
}

impl fmt::Display for MeanSd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.2} ± {:.2}", self.mean, self.sd)
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ParticipantMetrics {
    pub participant_id: String,
    pub notes: usize,
    pub rows: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Absent when the participant's rows hold a single class.
    pub auc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PooledMetrics {
    pub rows: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub auc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TypeMetrics {
    pub note_type: NoteType,
    pub notes: usize,
    pub rows: usize,
    pub auc: MeanSd,
    pub f1: MeanSd,
    pub auc_skipped: usize,
    pub pooled: PooledMetrics,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvalReport {
    pub strategy: String,
    pub protocol: Protocol,
    pub folds: usize,
    pub precision: MeanSd,
    pub recall: MeanSd,
    pub f1: MeanSd,
    pub auc: MeanSd,
    /// Participants excluded from the AUC mean for lacking one class.
    pub auc_skipped: usize,
    pub pooled: PooledMetrics,
    pub participants: Vec<ParticipantMetrics>,
    pub per_type: Vec<TypeMetrics>,
    pub warnings: Vec<String>,
}

fn pooled(scores: &[f64], predicted: &[bool], truth: &[bool]) -> Result<PooledMetrics> {
    let prf = precision_recall_f1(predicted, truth)?;
    let auc = match roc_auc(scores, truth) {
        Ok(v) => Some(v),
        Err(Error::SingleClass) => None,
        Err(e) => return Err(e),
    };
    Ok(PooledMetrics { rows: truth.len(), precision: prf.precision, recall: prf.recall, f1: prf.f1, auc })
}

struct Subset {
    participants: Vec<ParticipantMetrics>,
    pooled: PooledMetrics,
}

fn evaluate_subset(rows: &[FeatureRow], idx: &[usize], scores: &[f64], predicted: &[bool]) -> Result<Subset> {
    let truth_of = |i: usize| rows[i].truth().ok_or(Error::UnlabeledRow(i));
    let mut by_participant: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for &i in idx {
        by_participant.entry(&rows[i].participant_id).or_default().push(i);
    }
    let mut participants = Vec::new();
    for (pid, members) in by_participant {
        let s: Vec<f64> = members.iter().map(|&i| scores[i]).collect();
        let p: Vec<bool> = members.iter().map(|&i| predicted[i]).collect();
        let t: Vec<bool> = members.iter().map(|&i| truth_of(i)).collect::<Result<_>>()?;
        let m = pooled(&s, &p, &t)?;
        let notes: BTreeSet<u32> = members.iter().map(|&i| rows[i].vector.note_id).collect();
        participants.push(ParticipantMetrics {
            participant_id: pid.into(),
            notes: notes.len(),
            rows: members.len(),
            precision: m.precision,
            recall: m.recall,
            f1: m.f1,
            auc: m.auc,
        });
    }
    let s: Vec<f64> = idx.iter().map(|&i| scores[i]).collect();
    let p: Vec<bool> = idx.iter().map(|&i| predicted[i]).collect();
    let t: Vec<bool> = idx.iter().map(|&i| truth_of(i)).collect::<Result<_>>()?;
    Ok(Subset { participants, pooled: pooled(&s, &p, &t)? })
}

fn mean_of(participants: &[ParticipantMetrics], metric: impl Fn(&ParticipantMetrics) -> Option<f64>) -> MeanSd {
    let values: Vec<f64> = participants.iter().filter_map(metric).collect();
    MeanSd::of(&values)
}

/// Assembles a report from per-row scores and decisions.
pub fn build_report(
    strategy: &str,
    protocol: Protocol,
    folds: usize,
    rows: &[FeatureRow],
    scores: &[f64],
    predicted: &[bool],
) -> Result<EvalReport> {
    if scores.len() != rows.len() {
        return Err(Error::LengthMismatch(scores.len(), rows.len()));
    }
    if predicted.len() != rows.len() {
        return Err(Error::LengthMismatch(predicted.len(), rows.len()));
    }
    let all: Vec<usize> = (0..rows.len()).collect();
    let subset = evaluate_subset(rows, &all, scores, predicted)?;
    let (per_type, warnings) = per_note_type_report(rows, scores, predicted)?;
    let ps = &subset.participants;
    Ok(EvalReport {
        strategy: strategy.into(),
        protocol,
        folds,
        precision: mean_of(ps, |p| Some(p.precision)),
        recall: mean_of(ps, |p| Some(p.recall)),
        f1: mean_of(ps, |p| Some(p.f1)),
        auc: mean_of(ps, |p| p.auc),
        auc_skipped: ps.iter().filter(|p| p.auc.is_none()).count(),
        pooled: subset.pooled,
        participants: subset.participants,
        per_type,
        warnings,
    })
}

/// Metrics restricted to each note type. Types with no notes are omitted
/// with a warning; untagged rows are ignored.
pub fn per_note_type_report(
    rows: &[FeatureRow],
    scores: &[f64],
    predicted: &[bool],
) -> Result<(Vec<TypeMetrics>, Vec<String>)> {
    let mut warnings = Vec::new();
    let tagged = rows.iter().filter(|r| r.note_type.is_some()).count();
    if tagged == 0 {
        return Ok((Vec::new(), warnings));
    }
    if tagged < rows.len() {
        warnings.push(format!("{} rows without a note type were left out of the per-type table", rows.len() - tagged));
    }
    let mut table = Vec::new();
    for ty in NoteType::ALL {
        let idx: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].note_type == Some(ty)).collect();
        if idx.is_empty() {
            warnings.push(format!("no {ty} notes; row omitted"));
            continue;
        }
        let subset = evaluate_subset(rows, &idx, scores, predicted)?;
        let notes: BTreeSet<(&str, u32)> =
            idx.iter().map(|&i| (rows[i].participant_id.as_str(), rows[i].vector.note_id)).collect();
        let ps = &subset.participants;
        table.push(TypeMetrics {
            note_type: ty,
            notes: notes.len(),
            rows: idx.len(),
            auc: mean_of(ps, |p| p.auc),
            f1: mean_of(ps, |p| Some(p.f1)),
            auc_skipped: ps.iter().filter(|p| p.auc.is_none()).count(),
            pooled: subset.pooled,
        });
    }
    Ok((table, warnings))
}
