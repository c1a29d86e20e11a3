//! Heuristic anchoring strategies used as comparison points.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::audio::VoiceNote;
use crate::error::{Error, Result};
use crate::gaze::{assign_to_passages, detect_fixations, remove_outliers, IdtConfig};
use crate::layout::{scroll_state_at, visible_passages, DocGazeSample, PageLayout};
use crate::types::{Label, ScrollEvent, Viewport};

/// A scored anchoring decision for one (note, passage) pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnchorPrediction {
    pub note_id: u32,
    pub passage_id: u32,
    pub score: f64,
    pub label: Label,
}

/// Anchors the note to the topmost passage on screen when it started.
pub fn position_baseline(
    note: &VoiceNote,
    scrolls: &[ScrollEvent],
    layout: &PageLayout,
    viewport: Viewport,
) -> Result<Vec<AnchorPrediction>> {
    let state = scroll_state_at(scrolls, note.start).ok_or(Error::NoVisiblePassages(note.start))?;
    let visible = visible_passages(layout, state, viewport)?;
    if visible.is_empty() {
        return Err(Error::NoVisiblePassages(note.start));
    }
    Ok(visible
        .iter()
        .enumerate()
        .map(|(rank, &passage_id)| {
            let top = rank == 0;
            AnchorPrediction {
                note_id: note.note_id,
                passage_id,
                score: if top { 1.0 } else { 0.0 },
                label: Label::from_bool(top),
            }
        })
        .collect())
}

/// Anchors the note to the passage holding the most fixations during the
/// utterance itself.
///
/// Every passage with at least one fixation gets a row; the winner (lowest id
/// on ties) is labeled annotated and scored with its share of fixations, the
/// rest score 0. No fixations means no rows.
pub fn fixation_baseline(
    note: &VoiceNote,
    doc_gaze: &[DocGazeSample],
    layout: &PageLayout,
    cfg: &IdtConfig,
) -> Result<Vec<AnchorPrediction>> {
    let lo = doc_gaze.partition_point(|s| s.t < note.start);
    let hi = doc_gaze.partition_point(|s| s.t <= note.end);
    let clean = remove_outliers(&doc_gaze[lo..hi]);
    let fixations = assign_to_passages(&detect_fixations(&clean, cfg), layout)?;
    let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
    for id in fixations.iter().filter_map(|f| f.passage_id) {
        *counts.entry(id).or_default() += 1;
    }
    let total: usize = counts.values().sum();
    // BTreeMap iterates by ascending id, so strict > keeps the lowest id on ties
    let mut winner: Option<(u32, usize)> = None;
    for (&id, &c) in &counts {
        if winner.is_none_or(|(_, best)| c > best) {
            winner = Some((id, c));
        }
    }
    Ok(counts
        .keys()
        .map(|&passage_id| {
            let annotated = winner.is_some_and(|(w, _)| w == passage_id);
            let score = if annotated { counts[&passage_id] as f64 / total as f64 } else { 0.0 };
            AnchorPrediction { note_id: note.note_id, passage_id, score, label: Label::from_bool(annotated) }
        })
        .collect())
}

/// Re-expresses predictions over a note's candidate set: candidates without a
/// prediction become not-annotated with score 0, and predictions outside the
/// set are dropped.
pub fn align_to_candidates(note_id: u32, predictions: &[AnchorPrediction], candidates: &[u32]) -> Vec<AnchorPrediction> {
    candidates
        .iter()
        .map(|&passage_id| {
            predictions
                .iter()
                .find(|p| p.passage_id == passage_id)
                .copied()
                .unwrap_or(AnchorPrediction { note_id, passage_id, score: 0.0, label: Label::NotAnnotated })
        })
        .collect()
}
