//! Fixation detection (I-DT), saccade extraction and passage assignment.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::layout::{DocGazeSample, PageLayout};
use crate::types::Millis;

/// Dispersion-threshold parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IdtConfig {
    /// Maximum `(max x - min x) + (max y - min y)` of a fixation, in pixels.
    pub dispersion_threshold: f64,
    /// Minimum fixation span, in milliseconds.
    pub duration_threshold: Millis,
}

impl IdtConfig {
    /// Parameters of the learned pipeline.
    pub const PIPELINE: IdtConfig = IdtConfig { dispersion_threshold: 25.0, duration_threshold: 100 };
    /// Parameters of the fixation-count baseline.
    pub const BASELINE: IdtConfig = IdtConfig { dispersion_threshold: 20.0, duration_threshold: 100 };
}

impl Default for IdtConfig {
    fn default() -> Self {
        IdtConfig::PIPELINE
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fixation {
    pub start: Millis,
    pub end: Millis,
    pub cx: f64,
    pub cy: f64,
    pub page: u32,
    pub passage_id: Option<u32>,
    /// Number of member samples.
    pub samples: usize,
}

impl Fixation {
    pub fn duration(&self) -> Millis {
        self.end - self.start
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Saccade {
    pub from_fix: usize,
    pub to_fix: usize,
    pub length: f64,
    pub duration: Millis,
    pub velocity: f64,
    /// Passage of the landing fixation.
    pub passage_id: Option<u32>,
}

pub fn remove_outliers(samples: &[DocGazeSample]) -> Vec<DocGazeSample> {
    samples.iter().filter(|s| s.on_screen).copied().collect()
}

/// Running bounding box of a sample window.
#[derive(Clone, Copy)]
struct Bounds {
    min_x: f64,
    max_x: f64,
    min_y: f64,
    max_y: f64,
}

impl Bounds {
    fn of(s: &DocGazeSample) -> Self {
        Bounds { min_x: s.x, max_x: s.x, min_y: s.y, max_y: s.y }
    }

    fn with(self, s: &DocGazeSample) -> Self {
        Bounds {
            min_x: self.min_x.min(s.x),
            max_x: self.max_x.max(s.x),
            min_y: self.min_y.min(s.y),
            max_y: self.max_y.max(s.y),
        }
    }

    fn dispersion(&self) -> f64 {
        (self.max_x - self.min_x) + (self.max_y - self.min_y)
    }
}

/// Dispersion-threshold identification.
///
/// Input must be time-sorted. A page change ends the current window, so each
/// fixation lies on a single page.
pub fn detect_fixations(samples: &[DocGazeSample], cfg: &IdtConfig) -> Vec<Fixation> {
    let mut out = Vec::new();
    let mut start = 0;
    while start < samples.len() {
        let page = samples[start].page;
        let len = samples[start..].iter().take_while(|s| s.page == page).count();
        detect_on_page(&samples[start..start + len], cfg, &mut out);
        start += len;
    }
    out
}

fn detect_on_page(s: &[DocGazeSample], cfg: &IdtConfig, out: &mut Vec<Fixation>) {
    let n = s.len();
    let mut i = 0;
    while i < n {
        // smallest window covering the duration threshold
        let mut j = i;
        while j < n && s[j].t - s[i].t < cfg.duration_threshold {
            j += 1;
        }
        if j == n {
            break;
        }
        let mut bounds = s[i..=j].iter().skip(1).fold(Bounds::of(&s[i]), |b, p| b.with(p));
        if bounds.dispersion() > cfg.dispersion_threshold {
            i += 1;
            continue;
        }
        while j + 1 < n {
            let grown = bounds.with(&s[j + 1]);
            if grown.dispersion() > cfg.dispersion_threshold {
                break;
            }
            bounds = grown;
            j += 1;
        }
        out.push(fixation_from(&s[i..=j]));
        i = j + 1;
    }
}

fn fixation_from(members: &[DocGazeSample]) -> Fixation {
    let n = members.len() as f64;
    let cx = members.iter().map(|p| p.x).sum::<f64>() / n;
    let cy = members.iter().map(|p| p.y).sum::<f64>() / n;
    Fixation {
        start: members[0].t,
        end: members[members.len() - 1].t,
        cx,
        cy,
        page: members[0].page,
        passage_id: None,
        samples: members.len(),
    }
}

/// Saccades between consecutive fixations.
pub fn extract_saccades(fixations: &[Fixation]) -> Vec<Saccade> {
    fixations
        .windows(2)
        .enumerate()
        .map(|(i, w)| {
            let length = libm::hypot(w[1].cx - w[0].cx, w[1].cy - w[0].cy);
            let duration = (w[1].start - w[0].end).max(1);
            Saccade {
                from_fix: i,
                to_fix: i + 1,
                length,
                duration,
                velocity: length / duration as f64,
                passage_id: w[1].passage_id,
            }
        })
        .collect()
}

/// Assigns each fixation to the passage containing its centroid, or failing
/// that to the nearest passage on its page (lowest id on ties).
pub fn assign_to_passages(fixations: &[Fixation], layout: &PageLayout) -> Result<Vec<Fixation>> {
    fixations
        .iter()
        .map(|f| {
            let page = layout.page(f.page).ok_or(Error::NoPassagesOnPage(f.page))?;
            let mut best: Option<(f64, u32)> = None;
            for p in &page.passages {
                let d = p.distance_to(f.cx, f.cy);
                let better = match best {
                    None => true,
                    Some((bd, bid)) => d < bd || (d == bd && p.id < bid),
                };
                if better {
                    best = Some((d, p.id));
                }
            }
            let (_, id) = best.ok_or(Error::NoPassagesOnPage(f.page))?;
            Ok(Fixation { passage_id: Some(id), ..*f })
        })
        .collect()
}
