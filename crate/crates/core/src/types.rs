//! Recorded session streams and shared value types.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::Error;
use crate::layout::PageLayout;

/// Session clock, integer milliseconds.
pub type Millis = i64;

/// Eye-tracker sample in screen pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GazeSample {
    pub t: Millis,
    pub x: f64,
    pub y: f64,
}

/// Viewport state change: which page is shown and how far it is scrolled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScrollEvent {
    pub t: Millis,
    /// 1-based.
    pub page: u32,
    /// Document-pixel offset of the viewport top.
    pub scroll_y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Viewport {
    pub w: f64,
    pub h: f64,
}

/// Audio level at the start of a frame, in dBFS.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopePoint {
    pub t: Millis,
    pub db: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum AudioTrack {
    /// 16-bit mono PCM.
    Pcm { sample_rate: u32, samples: Vec<i16> },
    /// Precomputed level envelope.
    Envelope(Vec<EnvelopePoint>),
}

/// Ground truth: note id to the passages the reader marked for it.
pub type GroundTruth = BTreeMap<u32, BTreeSet<u32>>;

/// One recorded reading session.
#[derive(Debug, Clone, PartialEq)]
pub struct Session {
    pub participant_id: String,
    pub gaze: Vec<GazeSample>,
    pub scrolls: Vec<ScrollEvent>,
    pub layout: PageLayout,
    pub viewport: Viewport,
    pub audio: AudioTrack,
    pub ground_truth: Option<GroundTruth>,
}

/// Note-taking behavior a voice note was made with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum NoteType {
    Short,
    Reflective,
    Summary,
}

impl NoteType {
    pub const ALL: [NoteType; 3] = [NoteType::Short, NoteType::Reflective, NoteType::Summary];

    pub fn as_str(self) -> &'static str {
        match self {
            NoteType::Short => "short",
            NoteType::Reflective => "reflective",
            NoteType::Summary => "summary",
        }
    }
}

impl fmt::Display for NoteType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NoteType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim() {
            "short" => Ok(NoteType::Short),
            "reflective" => Ok(NoteType::Reflective),
            "summary" => Ok(NoteType::Summary),
            other => Err(Error::UnknownTag(other.into())),
        }
    }
}

/// Whether a note was anchored to a passage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Annotated,
    NotAnnotated,
    Unknown,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Annotated => "annotated",
            Label::NotAnnotated => "not_annotated",
            Label::Unknown => "unknown",
        }
    }

    pub fn from_bool(annotated: bool) -> Label {
        if annotated {
            Label::Annotated
        } else {
            Label::NotAnnotated
        }
    }

    pub fn as_bool(self) -> Option<bool> {
        match self {
            Label::Annotated => Some(true),
            Label::NotAnnotated => Some(false),
            Label::Unknown => None,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim() {
            "annotated" | "1" => Ok(Label::Annotated),
            "not_annotated" | "0" => Ok(Label::NotAnnotated),
            "unknown" | "" => Ok(Label::Unknown),
            other => Err(Error::Validation(alloc::format!("unknown label {other:?}"))),
        }
    }
}
