//! Pipeline interchange files: notes, features, predictions and models.

use std::path::Path;

use voxanchor_core::audio::VoiceNote;
use voxanchor_core::baselines::AnchorPrediction;
use voxanchor_core::eval::FeatureRow;
use voxanchor_core::features::{PassageFeatureVector, N_FEATURES};
use voxanchor_core::forest::{decode_forest, encode_forest, TrainedForest};
use voxanchor_core::Label;

use crate::error::{Error, Result};
use crate::formats::{field, read_csv, read_text, write_text, Out};

pub fn write_notes(path: &Path, notes: &[VoiceNote]) -> Result<()> {
    let mut out = Out::create(path)?;
    out.line(format_args!("note_id,start_ms,end_ms"))?;
    for n in notes {
        out.line(format_args!("{},{},{}", n.note_id, n.start, n.end))?;
    }
    out.finish()
}

fn features_header() -> Vec<String> {
    let mut h: Vec<String> = ["participant_id", "note_id", "passage_id"].map(String::from).to_vec();
    h.extend((1..=N_FEATURES).map(|i| format!("f{i}")));
    h.push("label".into());
    h
}

/// `participant_id,note_id,passage_id,f1..f15,label`. Values are written in
/// shortest round-trip form, so reading the file back is exact.
pub fn write_features(path: &Path, rows: &[FeatureRow]) -> Result<()> {
    let mut out = Out::create(path)?;
    out.line(format_args!("{}", features_header().join(",")))?;
    let mut line = String::new();
    for r in rows {
        use std::fmt::Write;
        line.clear();
        let v = &r.vector;
        let _ = write!(line, "{},{},{}", field(&r.participant_id), v.note_id, v.passage_id);
        for f in v.features {
            let _ = write!(line, ",{f}");
        }
        let _ = write!(line, ",{}", v.label);
        out.line(format_args!("{line}"))?;
    }
    out.finish()
}

/// Reads a features file; note types are not part of it.
pub fn read_features(path: &Path) -> Result<Vec<FeatureRow>> {
    let header = features_header();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut rows = Vec::new();
    read_csv(path, &header, |r| {
        let mut features = [0.0; N_FEATURES];
        for (i, f) in features.iter_mut().enumerate() {
            *f = r.finite(3 + i, &format!("f{}", i + 1))?;
        }
        let label: Label = r.raw(3 + N_FEATURES).parse().map_err(|e: voxanchor_core::Error| r.error(e.to_string()))?;
        rows.push(FeatureRow {
            participant_id: r.raw(0).to_string(),
            note_type: None,
            vector: PassageFeatureVector {
                note_id: r.get(1, "note_id")?,
                passage_id: r.get(2, "passage_id")?,
                features,
                label,
            },
        });
        Ok(())
    })?;
    Ok(rows)
}

/// Fails naming the file when any row lacks a label.
pub fn require_labels(path: &Path, rows: &[FeatureRow]) -> Result<()> {
    let missing = rows.iter().filter(|r| r.truth().is_none()).count();
    if missing > 0 {
        return Err(Error::Invalid {
            path: path.to_path_buf(),
            msg: format!("{missing} of {} rows have no annotation label", rows.len()),
        });
    }
    Ok(())
}

pub struct PredictionRow<'a> {
    pub strategy: &'a str,
    pub participant_id: &'a str,
    pub prediction: AnchorPrediction,
}

/// `strategy,participant_id,note_id,passage_id,score,label`.
pub fn write_predictions(path: &Path, rows: &[PredictionRow<'_>]) -> Result<()> {
    let mut out = Out::create(path)?;
    out.line(format_args!("strategy,participant_id,note_id,passage_id,score,label"))?;
    for r in rows {
        let p = &r.prediction;
        out.line(format_args!(
            "{},{},{},{},{},{}",
            r.strategy,
            field(r.participant_id),
            p.note_id,
            p.passage_id,
            p.score,
            p.label
        ))?;
    }
    out.finish()
}

pub fn save_model(path: &Path, model: &TrainedForest) -> Result<()> {
    write_text(path, &encode_forest(model))
}

pub fn load_model(path: &Path) -> Result<TrainedForest> {
    decode_forest(&read_text(path)?).map_err(|e| Error::in_file(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn features_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        let rows: Vec<FeatureRow> = (0..6)
            .map(|i| FeatureRow {
                participant_id: if i < 3 { "a,b".into() } else { "P2".into() },
                note_type: None,
                vector: PassageFeatureVector {
                    note_id: i / 2,
                    passage_id: i,
                    features: std::array::from_fn(|k| (k as f64 + 0.1) / (i as f64 + 3.0)),
                    label: [Label::Annotated, Label::NotAnnotated, Label::Unknown][i as usize % 3],
                },
            })
            .collect();
        write_features(&path, &rows).unwrap();
        assert_eq!(read_features(&path).unwrap(), rows);
        assert!(require_labels(&path, &rows).unwrap_err().to_string().contains("f.csv"));
    }

    #[test]
    fn wrong_header_is_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        std::fs::write(&path, "participant_id,note_id\nP1,0\n").unwrap();
        let err = read_features(&path).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
    }
}
