//! Session normalization and soft validation.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{invalid, Result};
use crate::types::{AudioTrack, Millis, ScrollEvent, Session};

/// Gaze gaps longer than this are reported.
pub const GAZE_GAP_MS: Millis = 500;
/// Off-screen fractions above this are reported.
pub const OFF_SCREEN_RATIO: f64 = 0.2;

/// Checks the hard invariants of a freshly parsed session and brings its
/// streams into canonical form.
///
/// Duplicate scroll timestamps keep the last event, and a `t = 0` event on
/// page 1 at offset 0 is inserted when the stream does not start at zero.
pub fn normalize_session(mut s: Session) -> Result<Session> {
    if !(s.viewport.w > 0.0 && s.viewport.h > 0.0) {
        return Err(invalid("viewport dimensions must be positive"));
    }
    if s.gaze.is_empty() {
        return Err(invalid("no gaze samples"));
    }
    if s.gaze.iter().any(|g| g.t < 0) {
        return Err(invalid("negative gaze timestamp"));
    }
    if s.gaze.windows(2).any(|w| w[1].t < w[0].t) {
        return Err(invalid("non-monotonic timestamps in gaze stream"));
    }
    if !s.gaze.iter().all(|g| g.x.is_finite() && g.y.is_finite()) {
        return Err(invalid("non-finite gaze coordinate"));
    }
    for ev in &s.scrolls {
        if ev.t < 0 || ev.page == 0 || !(ev.scroll_y >= 0.0) {
            return Err(invalid(format!("invalid scroll event at t={}", ev.t)));
        }
    }
    if s.scrolls.windows(2).any(|w| w[1].t < w[0].t) {
        return Err(invalid("non-monotonic timestamps in scroll stream"));
    }
    s.layout.validate()?;
    dedupe_scrolls(&mut s.scrolls);
    if s.scrolls.first().is_none_or(|ev| ev.t != 0) {
        s.scrolls.insert(0, ScrollEvent { t: 0, page: 1, scroll_y: 0.0 });
    }
    for ev in &s.scrolls {
        if s.layout.page(ev.page).is_none() {
            return Err(invalid(format!("scroll event at t={} names unknown page {}", ev.t, ev.page)));
        }
    }
    match &s.audio {
        AudioTrack::Pcm { sample_rate, .. } if *sample_rate == 0 => {
            return Err(invalid("audio sample rate must be positive"));
        }
        AudioTrack::Envelope(env) if env.windows(2).any(|w| w[1].t <= w[0].t) => {
            return Err(invalid("non-monotonic timestamps in envelope"));
        }
        _ => {}
    }
    if let Some(truth) = &s.ground_truth {
        for (note, passages) in truth {
            if let Some(p) = passages.iter().find(|p| s.layout.passage(**p).is_none()) {
                return Err(invalid(format!("label for note {note} names unknown passage {p}")));
            }
        }
    }
    Ok(s)
}

fn dedupe_scrolls(scrolls: &mut Vec<ScrollEvent>) {
    let mut out: Vec<ScrollEvent> = Vec::with_capacity(scrolls.len());
    for ev in scrolls.drain(..) {
        match out.last_mut() {
            Some(last) if last.t == ev.t => *last = ev,
            _ => out.push(ev),
        }
    }
    *scrolls = out;
}

/// Non-fatal data quality issue.
#[derive(Debug, Clone, PartialEq)]
pub enum SessionWarning {
    GazeGap { from: Millis, to: Millis },
    OffScreenRatio { ratio: f64 },
}

impl fmt::Display for SessionWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SessionWarning::GazeGap { from, to } => {
                write!(f, "gaze gap of {} ms between t={from} and t={to}", to - from)
            }
            SessionWarning::OffScreenRatio { ratio } => {
                write!(f, "off-screen ratio {:.1}% exceeds {:.0}%", ratio * 100.0, OFF_SCREEN_RATIO * 100.0)
            }
        }
    }
}

impl SessionWarning {
    pub fn kind(&self) -> &'static str {
        match self {
            SessionWarning::GazeGap { .. } => "gaze gap",
            SessionWarning::OffScreenRatio { .. } => "off-screen ratio",
        }
    }
}

/// Reports gaze gaps and excessive off-screen gaze.
pub fn validate_session(s: &Session) -> Vec<SessionWarning> {
    let mut warnings: Vec<SessionWarning> = s
        .gaze
        .windows(2)
        .filter(|w| w[1].t - w[0].t > GAZE_GAP_MS)
        .map(|w| SessionWarning::GazeGap { from: w[0].t, to: w[1].t })
        .collect();
    if !s.gaze.is_empty() {
        let off = s
            .gaze
            .iter()
            .filter(|g| !(g.x >= 0.0 && g.x < s.viewport.w && g.y >= 0.0 && g.y < s.viewport.h))
            .count();
        let ratio = off as f64 / s.gaze.len() as f64;
        if ratio > OFF_SCREEN_RATIO {
            warnings.push(SessionWarning::OffScreenRatio { ratio });
        }
    }
    warnings
}

/// Human-readable summary of a warning list.
pub fn describe_warnings(warnings: &[SessionWarning]) -> Vec<String> {
    warnings.iter().map(|w| format!("{w}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::{Page, PageLayout, Passage};
    use crate::types::{EnvelopePoint, GazeSample, Viewport};
    use crate::Error;
    use alloc::vec;

    fn session(gaze: Vec<GazeSample>, scrolls: Vec<ScrollEvent>) -> Session {
        Session {
            participant_id: "p".into(),
            gaze,
            scrolls,
            layout: PageLayout::new(vec![Page {
                page: 1,
                w: 960.0,
                h: 1280.0,
                passages: vec![Passage { id: 0, page: 1, x: 60.0, y: 80.0, w: 560.0, h: 136.0 }],
            }])
            .unwrap(),
            viewport: Viewport { w: 960.0, h: 720.0 },
            audio: AudioTrack::Envelope(vec![EnvelopePoint { t: 0, db: -60.0 }]),
            ground_truth: None,
        }
    }

    fn g(t: Millis, x: f64, y: f64) -> GazeSample {
        GazeSample { t, x, y }
    }

    fn steady(n: usize) -> Vec<GazeSample> {
        (0..n).map(|i| g(i as Millis * 11, 100.0, 100.0)).collect()
    }

    #[test]
    fn empty_gaze_rejected() {
        let err = normalize_session(session(vec![], vec![])).unwrap_err();
        assert_eq!(err, Error::Validation("no gaze samples".into()));
    }

    #[test]
    fn non_monotonic_gaze_rejected() {
        let err = normalize_session(session(vec![g(10, 1.0, 1.0), g(5, 1.0, 1.0)], vec![])).unwrap_err();
        assert!(format!("{err}").contains("non-monotonic timestamps"));
    }

    #[test]
    fn initial_scroll_synthesized() {
        let s = normalize_session(session(steady(3), vec![])).unwrap();
        assert_eq!(s.scrolls, vec![ScrollEvent { t: 0, page: 1, scroll_y: 0.0 }]);
        let later = ScrollEvent { t: 40, page: 1, scroll_y: 10.0 };
        let s = normalize_session(session(steady(3), vec![later])).unwrap();
        assert_eq!(s.scrolls.len(), 2);
        assert_eq!(s.scrolls[0].t, 0);
    }

    #[test]
    fn existing_zero_scroll_kept() {
        let first = ScrollEvent { t: 0, page: 1, scroll_y: 50.0 };
        let s = normalize_session(session(steady(3), vec![first])).unwrap();
        assert_eq!(s.scrolls, vec![first]);
    }

    #[test]
    fn duplicate_scroll_timestamps_keep_last() {
        let a = ScrollEvent { t: 20, page: 1, scroll_y: 10.0 };
        let b = ScrollEvent { t: 20, page: 1, scroll_y: 30.0 };
        let s = normalize_session(session(steady(3), vec![a, b])).unwrap();
        assert_eq!(s.scrolls[1..], [b]);
    }

    #[test]
    fn duplicate_gaze_timestamps_allowed() {
        let s = normalize_session(session(vec![g(5, 1.0, 1.0), g(5, 2.0, 2.0)], vec![])).unwrap();
        assert_eq!(s.gaze.len(), 2);
        assert_eq!(s.gaze[1].x, 2.0);
    }

    #[test]
    fn clean_session_has_no_warnings() {
        assert!(validate_session(&session(steady(100), vec![])).is_empty());
    }

    #[test]
    fn one_second_gap_is_reported() {
        let mut gaze = steady(10);
        gaze.extend((0..10).map(|i| g(1099 + i * 11, 100.0, 100.0)));
        let w = validate_session(&session(gaze, vec![]));
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].kind(), "gaze gap");
    }

    #[test]
    fn off_screen_ratio_is_reported() {
        let gaze: Vec<_> = (0..100)
            .map(|i| if i % 10 < 3 { g(i * 11, -20.0, 100.0) } else { g(i * 11, 100.0, 100.0) })
            .collect();
        let w = validate_session(&session(gaze, vec![]));
        assert_eq!(w.len(), 1);
        assert_eq!(w[0], SessionWarning::OffScreenRatio { ratio: 0.3 });
    }
}
