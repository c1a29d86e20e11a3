//! Parallel drivers over sessions, trees and folds. Work is split with rayon
//! and always collected back in input order, so results do not depend on the
//! worker count.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use voxanchor_core::eval::{
    build_report, collect_scores, fold_training_data, lopo_folds, loo_note_folds, score_fold, EvalReport, FeatureRow, Fold,
    Protocol,
};
use voxanchor_core::features::N_FEATURES;
use voxanchor_core::forest::{assemble_forest, check_training_labels, train_tree, ForestConfig, TrainedForest, DECISION_THRESHOLD};
use voxanchor_core::pipeline::{analyze_session, Baseline, PipelineConfig, SessionAnalysis};
use voxanchor_core::session::validate_session;
use voxanchor_core::{Label, NoteType};

use crate::error::{Error, Result};
use crate::session_io::{load_note_types, load_session};

/// Trees are grown concurrently; tree `i` always uses random stream `i`.
pub fn train(x: &[[f64; N_FEATURES]], y: &[bool], cfg: &ForestConfig) -> Result<TrainedForest> {
    cfg.validate()?;
    if x.len() != y.len() {
        return Err(voxanchor_core::Error::LengthMismatch(x.len(), y.len()).into());
    }
    check_training_labels(y)?;
    let fitted = (0..cfg.n_trees as u64).into_par_iter().map(|i| train_tree(x, y, cfg, i)).collect();
    Ok(assemble_forest(*cfg, fitted))
}

pub fn train_rows(rows: &[FeatureRow], cfg: &ForestConfig) -> Result<TrainedForest> {
    let all = Fold { held_out: String::new(), train: (0..rows.len()).collect(), test: Vec::new() };
    let (x, y) = fold_training_data(rows, &all)?;
    train(&x, &y, cfg)
}

pub fn folds(rows: &[FeatureRow], protocol: Protocol) -> Result<Vec<Fold>> {
    match protocol {
        Protocol::LeaveOneParticipantOut => Ok(lopo_folds(rows)?),
        Protocol::LeaveOneNoteOut => Ok(loo_note_folds(rows)?),
        Protocol::Direct => Err(Error::Usage("cross-validation needs lopo or loo".into())),
    }
}

/// Cross-validated report of the learned model; folds run concurrently.
pub fn cross_validate(rows: &[FeatureRow], protocol: Protocol, cfg: &ForestConfig) -> Result<EvalReport> {
    let folds = folds(rows, protocol)?;
    let fold_scores = folds
        .par_iter()
        .map(|fold| {
            let (x, y) = fold_training_data(rows, fold)?;
            let model = train(&x, &y, cfg)
                .map_err(|e| Error::Usage(format!("training fold {} failed: {e}", fold.held_out)))?;
            Ok(score_fold(rows, fold, &model))
        })
        .collect::<Result<Vec<_>>>()?;
    let scores = collect_scores(rows.len(), &folds, &fold_scores);
    let predicted: Vec<bool> = scores.iter().map(|&s| s >= DECISION_THRESHOLD).collect();
    Ok(build_report("learned", protocol, folds.len(), rows, &scores, &predicted)?)
}

/// One analyzed session directory.
pub struct Analyzed {
    pub dir: PathBuf,
    pub analysis: SessionAnalysis,
    pub note_types: Option<BTreeMap<u32, NoteType>>,
    pub warnings: Vec<String>,
}

impl Analyzed {
    pub fn rows(&self) -> Vec<FeatureRow> {
        self.analysis.feature_rows(self.note_types.as_ref())
    }
}

pub fn analyze_dir(dir: &Path, cfg: &PipelineConfig) -> Result<Analyzed> {
    let session = load_session(dir)?;
    let warnings =
        validate_session(&session).iter().map(|w| format!("{}: {} ({w})", dir.display(), w.kind())).collect();
    let analysis = analyze_session(&session, cfg).map_err(|e| Error::in_file(dir, e))?;
    let note_types = load_note_types(dir)?;
    Ok(Analyzed { dir: dir.to_path_buf(), analysis, note_types, warnings })
}

/// Sessions are analyzed concurrently and returned in directory order.
pub fn analyze_dirs(dirs: &[PathBuf], cfg: &PipelineConfig) -> Result<Vec<Analyzed>> {
    dirs.par_iter().map(|d| analyze_dir(d, cfg)).collect()
}

pub fn corpus_rows(corpus: &[Analyzed]) -> Vec<FeatureRow> {
    corpus.iter().flat_map(Analyzed::rows).collect()
}

/// Report of a baseline over the same rows and grouping as the learned model.
/// The baseline is not trained; the fold count is that of the protocol.
pub fn baseline_report(corpus: &[Analyzed], rows: &[FeatureRow], strategy: Baseline, protocol: Protocol) -> Result<EvalReport> {
    let n_folds = folds(rows, protocol)?.len();
    let preds: Vec<_> = corpus.iter().flat_map(|a| a.analysis.baseline_predictions(strategy)).collect();
    if preds.len() != rows.len() {
        return Err(Error::Internal(format!("{} baseline rows for {} feature rows", preds.len(), rows.len())));
    }
    let scores: Vec<f64> = preds.iter().map(|p| p.score).collect();
    let predicted: Vec<bool> = preds.iter().map(|p| p.label == Label::Annotated).collect();
    Ok(build_report(strategy.name(), protocol, n_folds, rows, &scores, &predicted)?)
}
