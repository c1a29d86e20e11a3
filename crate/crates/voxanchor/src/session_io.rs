//! Session directories.
//!
//! ```text
//! gaze.csv         t_ms,x_px,y_px
//! scroll.csv       t_ms,page,scroll_y_px
//! layout.json      {"pages": [{"page": 1, "w": .., "h": .., "passages": [{"id", "x", "y", "w", "h"}]}]}
//! envelope.csv     t_ms,db              (or audio.wav, 16-bit mono PCM)
//! labels.csv       note_id,passage_id   (optional)
//! note_types.csv   note_id,type         (optional)
//! meta.json        {"participant_id", "viewport_w", "viewport_h"}
//! ```
//!
//! When both audio files exist the envelope is used.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use voxanchor_core::layout::{Page, PageLayout, Passage};
use voxanchor_core::session::normalize_session;
use voxanchor_core::{AudioTrack, EnvelopePoint, GazeSample, GroundTruth, NoteType, ScrollEvent, Session, Viewport};

use crate::error::{io_err, Error, Result};
use crate::formats::{read_csv, read_text, write_text, Out};

pub const GAZE: &str = "gaze.csv";
pub const SCROLL: &str = "scroll.csv";
pub const LAYOUT: &str = "layout.json";
pub const ENVELOPE: &str = "envelope.csv";
pub const AUDIO: &str = "audio.wav";
pub const LABELS: &str = "labels.csv";
pub const NOTE_TYPES: &str = "note_types.csv";
pub const META: &str = "meta.json";

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Meta {
    participant_id: String,
    viewport_w: f64,
    viewport_h: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayoutFile {
    pages: Vec<PageFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PageFile {
    page: u32,
    w: f64,
    h: f64,
    passages: Vec<PassageFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PassageFile {
    id: u32,
    x: f64,
    y: f64,
    w: f64,
    h: f64,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse { path: path.to_path_buf(), line: e.line() as u64, msg: e.to_string() })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Internal(e.to_string()))?;
    text.push('\n');
    write_text(path, &text)
}

pub fn read_layout(path: &Path) -> Result<PageLayout> {
    let file: LayoutFile = read_json(path)?;
    let pages = file
        .pages
        .into_iter()
        .map(|p| Page {
            page: p.page,
            w: p.w,
            h: p.h,
            passages: p
                .passages
                .into_iter()
                .map(|q| Passage { id: q.id, page: p.page, x: q.x, y: q.y, w: q.w, h: q.h })
                .collect(),
        })
        .collect();
    PageLayout::new(pages).map_err(|e| Error::in_file(path, e))
}

pub fn write_layout(path: &Path, layout: &PageLayout) -> Result<()> {
    let file = LayoutFile {
        pages: layout
            .pages
            .iter()
            .map(|p| PageFile {
                page: p.page,
                w: p.w,
                h: p.h,
                passages: p.passages.iter().map(|q| PassageFile { id: q.id, x: q.x, y: q.y, w: q.w, h: q.h }).collect(),
            })
            .collect(),
    };
    write_json(path, &file)
}

fn read_gaze(path: &Path) -> Result<Vec<GazeSample>> {
    let mut out = Vec::new();
    read_csv(path, &["t_ms", "x_px", "y_px"], |r| {
        out.push(GazeSample { t: r.millis(0, "t_ms")?, x: r.finite(1, "x_px")?, y: r.finite(2, "y_px")? });
        Ok(())
    })?;
    Ok(out)
}

fn read_scrolls(path: &Path) -> Result<Vec<ScrollEvent>> {
    let mut out = Vec::new();
    read_csv(path, &["t_ms", "page", "scroll_y_px"], |r| {
        out.push(ScrollEvent { t: r.millis(0, "t_ms")?, page: r.get(1, "page")?, scroll_y: r.finite(2, "scroll_y_px")? });
        Ok(())
    })?;
    Ok(out)
}

pub fn read_envelope(path: &Path) -> Result<Vec<EnvelopePoint>> {
    let mut out = Vec::new();
    read_csv(path, &["t_ms", "db"], |r| {
        out.push(EnvelopePoint { t: r.millis(0, "t_ms")?, db: r.finite(1, "db")? });
        Ok(())
    })?;
    Ok(out)
}

pub fn read_wav(path: &Path) -> Result<AudioTrack> {
    let invalid = |msg: String| Error::Invalid { path: path.to_path_buf(), msg };
    let reader = hound::WavReader::open(path).map_err(|e| match e {
        hound::Error::IoError(io) => io_err(path)(io),
        other => invalid(other.to_string()),
    })?;
    let spec = reader.spec();
    if spec.channels != 1 || spec.bits_per_sample != 16 || spec.sample_format != hound::SampleFormat::Int {
        return Err(invalid(format!(
            "expected 16-bit integer mono PCM, found {} channel(s) of {}-bit {:?}",
            spec.channels, spec.bits_per_sample, spec.sample_format
        )));
    }
    let samples = reader.into_samples::<i16>().collect::<std::result::Result<Vec<_>, _>>().map_err(|e| invalid(e.to_string()))?;
    Ok(AudioTrack::Pcm { sample_rate: spec.sample_rate, samples })
}

pub fn write_wav(path: &Path, sample_rate: u32, samples: &[i16]) -> Result<()> {
    let spec = hound::WavSpec { channels: 1, sample_rate, bits_per_sample: 16, sample_format: hound::SampleFormat::Int };
    let wrap = |e: hound::Error| match e {
        hound::Error::IoError(source) => Error::Io { path: path.to_path_buf(), source },
        other => Error::Internal(other.to_string()),
    };
    let mut w = hound::WavWriter::create(path, spec).map_err(wrap)?;
    for &s in samples {
        w.write_sample(s).map_err(wrap)?;
    }
    w.finalize().map_err(wrap)
}

fn read_labels(path: &Path) -> Result<GroundTruth> {
    let mut out = GroundTruth::new();
    read_csv(path, &["note_id", "passage_id"], |r| {
        out.entry(r.get(0, "note_id")?).or_default().insert(r.get(1, "passage_id")?);
        Ok(())
    })?;
    Ok(out)
}

/// Per-note behavior tags, when the directory has them.
pub fn load_note_types(dir: &Path) -> Result<Option<BTreeMap<u32, NoteType>>> {
    let path = dir.join(NOTE_TYPES);
    if !path.exists() {
        return Ok(None);
    }
    let mut out = BTreeMap::new();
    read_csv(&path, &["note_id", "type"], |r| {
        let ty: NoteType = r.raw(1).parse().map_err(|e: voxanchor_core::Error| r.error(e.to_string()))?;
        out.insert(r.get(0, "note_id")?, ty);
        Ok(())
    })?;
    Ok(Some(out))
}

pub fn save_note_types(dir: &Path, types: &BTreeMap<u32, NoteType>) -> Result<()> {
    let path = dir.join(NOTE_TYPES);
    let mut out = Out::create(&path)?;
    out.line(format_args!("note_id,type"))?;
    for (id, ty) in types {
        out.line(format_args!("{id},{ty}"))?;
    }
    out.finish()
}

/// Loads, validates and normalizes a session directory.
pub fn load_session(dir: &Path) -> Result<Session> {
    let meta_path = dir.join(META);
    let meta: Meta = read_json(&meta_path)?;
    let layout = read_layout(&dir.join(LAYOUT))?;
    let gaze = read_gaze(&dir.join(GAZE))?;
    let scrolls = read_scrolls(&dir.join(SCROLL))?;
    let envelope_path = dir.join(ENVELOPE);
    let audio = if envelope_path.exists() {
        AudioTrack::Envelope(read_envelope(&envelope_path)?)
    } else {
        read_wav(&dir.join(AUDIO))?
    };
    let labels_path = dir.join(LABELS);
    let ground_truth = if labels_path.exists() { Some(read_labels(&labels_path)?) } else { None };
    let session = Session {
        participant_id: meta.participant_id,
        gaze,
        scrolls,
        layout,
        viewport: Viewport { w: meta.viewport_w, h: meta.viewport_h },
        audio,
        ground_truth,
    };
    normalize_session(session).map_err(|e| Error::Invalid { path: dir.to_path_buf(), msg: e.to_string() })
}

pub fn save_session(s: &Session, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    write_json(
        &dir.join(META),
        &Meta { participant_id: s.participant_id.clone(), viewport_w: s.viewport.w, viewport_h: s.viewport.h },
    )?;
    write_layout(&dir.join(LAYOUT), &s.layout)?;

    let path = dir.join(GAZE);
    let mut out = Out::create(&path)?;
    out.line(format_args!("t_ms,x_px,y_px"))?;
    for g in &s.gaze {
        out.line(format_args!("{},{},{}", g.t, g.x, g.y))?;
    }
    out.finish()?;

    let path = dir.join(SCROLL);
    let mut out = Out::create(&path)?;
    out.line(format_args!("t_ms,page,scroll_y_px"))?;
    for e in &s.scrolls {
        out.line(format_args!("{},{},{}", e.t, e.page, e.scroll_y))?;
    }
    out.finish()?;

    match &s.audio {
        AudioTrack::Envelope(env) => {
            let path = dir.join(ENVELOPE);
            let mut out = Out::create(&path)?;
            out.line(format_args!("t_ms,db"))?;
            for p in env {
                out.line(format_args!("{},{}", p.t, p.db))?;
            }
            out.finish()?;
        }
        AudioTrack::Pcm { sample_rate, samples } => write_wav(&dir.join(AUDIO), *sample_rate, samples)?,
    }

    if let Some(gt) = &s.ground_truth {
        let path = dir.join(LABELS);
        let mut out = Out::create(&path)?;
        out.line(format_args!("note_id,passage_id"))?;
        for (note, passages) in gt {
            for p in passages {
                out.line(format_args!("{note},{p}"))?;
            }
        }
        out.finish()?;
    }
    Ok(())
}

pub fn is_session_dir(path: &Path) -> bool {
    path.join(META).is_file()
}

/// A session directory itself, or every session directly inside a corpus
/// directory, sorted by name.
pub fn session_dirs(input: &Path) -> Result<Vec<PathBuf>> {
    if is_session_dir(input) {
        return Ok(vec![input.to_path_buf()]);
    }
    let entries = std::fs::read_dir(input).map_err(io_err(input))?;
    let mut dirs = Vec::new();
    for entry in entries {
        let path = entry.map_err(io_err(input))?.path();
        if is_session_dir(&path) {
            dirs.push(path);
        }
    }
    if dirs.is_empty() {
        return Err(Error::Invalid { path: input.to_path_buf(), msg: "no session directories found".into() });
    }
    dirs.sort();
    Ok(dirs)
}
