//! Per-session orchestration: voice notes, windows, fixations, features and
//! the baseline predictions over the same candidate sets.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::audio::{compute_envelope, compute_roas, extract_voice_notes, pcm16_to_unit, AudioConfig, RegionOfAnalysis, VoiceNote};
use crate::baselines::{align_to_candidates, fixation_baseline, position_baseline, AnchorPrediction};
use crate::error::{Error, Result};
use crate::eval::FeatureRow;
use crate::features::{candidate_passages, featurize_roa, PassageFeatureVector};
use crate::gaze::{assign_to_passages, detect_fixations, extract_saccades, remove_outliers, Fixation, IdtConfig};
use crate::layout::{map_gaze_to_document, scroll_state_at, visible_passages, DocGazeSample};
use crate::types::{AudioTrack, EnvelopePoint, Label, NoteType, Session};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    pub audio: AudioConfig,
    pub idt: IdtConfig,
    pub baseline_idt: IdtConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig { audio: AudioConfig::default(), idt: IdtConfig::PIPELINE, baseline_idt: IdtConfig::BASELINE }
    }
}

/// Everything computed for one voice note.
#[derive(Debug, Clone, PartialEq)]
pub struct NoteAnalysis {
    pub note: VoiceNote,
    pub roa: RegionOfAnalysis,
    pub candidates: Vec<u32>,
    /// Fixations detected inside the window, with passages assigned.
    pub fixations: Vec<Fixation>,
    /// One vector per candidate, in candidate order.
    pub vectors: Vec<PassageFeatureVector>,
    /// Baseline predictions aligned to `candidates`.
    pub position: Vec<AnchorPrediction>,
    pub fixation: Vec<AnchorPrediction>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionAnalysis {
    pub participant_id: String,
    pub notes: Vec<NoteAnalysis>,
}

pub fn session_envelope(audio: &AudioTrack, cfg: &AudioConfig) -> Result<Vec<EnvelopePoint>> {
    match audio {
        AudioTrack::Envelope(env) => {
            if env.is_empty() {
                return Err(Error::EmptyAudio);
            }
            Ok(env.clone())
        }
        AudioTrack::Pcm { sample_rate, samples } => compute_envelope(&pcm16_to_unit(samples), *sample_rate, cfg.frame_ms),
    }
}

pub fn session_notes(audio: &AudioTrack, cfg: &AudioConfig) -> Result<Vec<VoiceNote>> {
    Ok(extract_voice_notes(&session_envelope(audio, cfg)?, cfg))
}

fn window(doc_gaze: &[DocGazeSample], start: i64, end: i64) -> &[DocGazeSample] {
    let lo = doc_gaze.partition_point(|s| s.t < start);
    let hi = doc_gaze.partition_point(|s| s.t <= end);
    &doc_gaze[lo..hi]
}

/// Runs every per-note stage on a normalized session.
///
/// Labels come from the session's ground truth; notes it does not mention
/// stay [`Label::Unknown`].
pub fn analyze_session(s: &Session, cfg: &PipelineConfig) -> Result<SessionAnalysis> {
    let notes = session_notes(&s.audio, &cfg.audio)?;
    let roas = compute_roas(&notes, 0);
    let doc_gaze = map_gaze_to_document(&s.gaze, &s.scrolls, s.viewport, &s.layout);

    let mut out = Vec::with_capacity(notes.len());
    for (note, roa) in notes.iter().zip(roas) {
        let clean = remove_outliers(window(&doc_gaze, roa.roa_start, roa.roa_end));
        let fixations = assign_to_passages(&detect_fixations(&clean, &cfg.idt), &s.layout)?;
        let saccades = extract_saccades(&fixations);

        let visible = match scroll_state_at(&s.scrolls, note.start) {
            Some(state) => visible_passages(&s.layout, state, s.viewport)?,
            None => Vec::new(),
        };
        let candidates = candidate_passages(&roa, &doc_gaze, &fixations, &s.layout, &visible);
        let mut vectors = featurize_roa(&roa, note.start, &fixations, &saccades, &s.layout, &candidates)?;
        let truth = s.ground_truth.as_ref().and_then(|gt| gt.get(&note.note_id));
        for v in &mut vectors {
            v.label = truth.map_or(Label::Unknown, |set| Label::from_bool(set.contains(&v.passage_id)));
        }

        let position = match position_baseline(note, &s.scrolls, &s.layout, s.viewport) {
            Ok(p) => p,
            Err(Error::NoVisiblePassages(_)) => Vec::new(),
            Err(e) => return Err(e),
        };
        let fixation = fixation_baseline(note, &doc_gaze, &s.layout, &cfg.baseline_idt)?;
        out.push(NoteAnalysis {
            note: *note,
            roa,
            position: align_to_candidates(note.note_id, &position, &candidates),
            fixation: align_to_candidates(note.note_id, &fixation, &candidates),
            candidates,
            fixations,
            vectors,
        });
    }
    Ok(SessionAnalysis { participant_id: s.participant_id.clone(), notes: out })
}

impl SessionAnalysis {
    /// Feature rows tagged with participant and (when known) note type.
    pub fn feature_rows(&self, note_types: Option<&BTreeMap<u32, NoteType>>) -> Vec<FeatureRow> {
        self.notes
            .iter()
            .flat_map(|n| {
                let note_type = note_types.and_then(|m| m.get(&n.note.note_id).copied());
                n.vectors.iter().map(move |v| FeatureRow {
                    participant_id: self.participant_id.clone(),
                    note_type,
                    vector: v.clone(),
                })
            })
            .collect()
    }

    /// Baseline predictions in the same order as [`Self::feature_rows`].
    pub fn baseline_predictions(&self, strategy: Baseline) -> Vec<AnchorPrediction> {
        self.notes
            .iter()
            .flat_map(|n| match strategy {
                Baseline::Position => n.position.iter().copied(),
                Baseline::Fixation => n.fixation.iter().copied(),
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Baseline {
    Position,
    Fixation,
}

impl Baseline {
    pub fn name(self) -> &'static str {
        match self {
            Baseline::Position => "position",
            Baseline::Fixation => "fixation",
        }
    }
}
