//! Per-passage gaze and temporal features over a note's analysis window.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::audio::RegionOfAnalysis;
use crate::error::{Error, Result};
use crate::gaze::{Fixation, Saccade};
use crate::layout::{DocGazeSample, PageLayout};
use crate::types::{Label, Millis};

pub const N_FEATURES: usize = 15;

/// Column names, in feature-vector order.
pub const FEATURE_NAMES: [&str; N_FEATURES] = [
    "norm_fixation_count",
    "max_fixation_duration",
    "min_fixation_duration",
    "avg_fixation_duration",
    "max_saccade_length",
    "min_saccade_length",
    "avg_saccade_length",
    "max_saccade_duration",
    "min_saccade_duration",
    "avg_saccade_duration",
    "max_saccade_velocity",
    "min_saccade_velocity",
    "avg_saccade_velocity",
    "norm_time_duration",
    "temporal_order",
];

/// Index of the temporal-order feature.
pub const TEMPORAL_ORDER: usize = 14;

/// Number of leading fixations averaged for the temporal order.
pub const FIRST_FIXATIONS: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct PassageFeatureVector {
    pub note_id: u32,
    pub passage_id: u32,
    pub features: [f64; N_FEATURES],
    pub label: Label,
}

/// `[max, min, avg]`, or zeros when empty.
fn stat_triple(values: impl Iterator<Item = f64>) -> [f64; 3] {
    let (mut max, mut min, mut sum, mut n) = (f64::NEG_INFINITY, f64::INFINITY, 0.0, 0usize);
    for v in values {
        max = max.max(v);
        min = min.min(v);
        sum += v;
        n += 1;
    }
    if n == 0 {
        return [0.0; 3];
    }
    // summation rounding can push the mean a hair outside [min, max]
    [max, min, (sum / n as f64).clamp(min, max)]
}

/// Passages worth scoring for a note: those that received an on-screen gaze
/// sample or an assigned fixation inside the window, plus those visible when
/// the note started. Sorted by id.
pub fn candidate_passages(
    roa: &RegionOfAnalysis,
    doc_gaze: &[DocGazeSample],
    fixations: &[Fixation],
    layout: &PageLayout,
    visible_at_start: &[u32],
) -> Vec<u32> {
    let mut ids: Vec<u32> = visible_at_start.to_vec();
    let lo = doc_gaze.partition_point(|s| s.t < roa.roa_start);
    let hi = doc_gaze.partition_point(|s| s.t <= roa.roa_end);
    for s in doc_gaze[lo..hi].iter().filter(|s| s.on_screen) {
        let hit = layout.page(s.page).and_then(|page| page.passages.iter().find(|p| p.contains(s.x, s.y)));
        if let Some(p) = hit {
            ids.push(p.id);
        }
    }
    ids.extend(fixations.iter().filter(|f| roa.contains(f.start)).filter_map(|f| f.passage_id));
    ids.sort_unstable();
    ids.dedup();
    ids
}

/// Recency of reading, per passage, min-max normalized to `[0, 1]`.
///
/// `first_starts` maps each passage to the start times of its fixations in
/// chronological order. For a passage with fixations the lag is the note
/// start minus the mean start of its first (up to) five fixations; lags are
/// then rescaled so the smallest maps to 0. Passages without fixations get
/// 1.0, and a lone passage with fixations gets 0.0.
pub fn temporal_order(first_starts: &BTreeMap<u32, Vec<Millis>>, note_start: Millis) -> BTreeMap<u32, f64> {
    let lags: BTreeMap<u32, f64> = first_starts
        .iter()
        .filter(|(_, starts)| !starts.is_empty())
        .map(|(&id, starts)| {
            let k = starts.len().min(FIRST_FIXATIONS);
            let mean = starts[..k].iter().map(|&t| t as f64).sum::<f64>() / k as f64;
            (id, note_start as f64 - mean)
        })
        .collect();
    let lo = lags.values().copied().fold(f64::INFINITY, f64::min);
    let hi = lags.values().copied().fold(f64::NEG_INFINITY, f64::max);
    first_starts
        .keys()
        .map(|&id| {
            let v = match lags.get(&id) {
                None => 1.0,
                Some(_) if hi <= lo => 0.0,
                Some(&lag) => ((lag - lo) / (hi - lo)).clamp(0.0, 1.0),
            };
            (id, v)
        })
        .collect()
}

/// Feature vectors for every candidate passage of one note.
///
/// `fixations` (already assigned to passages) and `saccades` must be
/// restricted to the note's window. Vectors come back in candidate order with
/// [`Label::Unknown`].
pub fn featurize_roa(
    roa: &RegionOfAnalysis,
    note_start: Millis,
    fixations: &[Fixation],
    saccades: &[Saccade],
    layout: &PageLayout,
    candidates: &[u32],
) -> Result<Vec<PassageFeatureVector>> {
    if layout.passage_count() == 0 {
        return Err(Error::EmptyLayout);
    }
    let mut starts: BTreeMap<u32, Vec<Millis>> = candidates.iter().map(|&id| (id, Vec::new())).collect();
    for f in fixations {
        if let Some(list) = f.passage_id.and_then(|id| starts.get_mut(&id)) {
            list.push(f.start);
        }
    }
    for list in starts.values_mut() {
        list.sort_unstable();
    }
    let order = temporal_order(&starts, note_start);

    candidates
        .iter()
        .map(|&id| {
            let passage = layout.passage(id).ok_or(Error::UnknownPassage(id))?;
            let area = passage.area();
            let mine: Vec<&Fixation> = fixations.iter().filter(|f| f.passage_id == Some(id)).collect();
            let landing: Vec<&Saccade> = saccades.iter().filter(|s| s.passage_id == Some(id)).collect();

            let mut v = [0.0; N_FEATURES];
            v[0] = mine.len() as f64 / area;
            v[1..4].copy_from_slice(&stat_triple(mine.iter().map(|f| f.duration() as f64)));
            v[4..7].copy_from_slice(&stat_triple(landing.iter().map(|s| s.length)));
            v[7..10].copy_from_slice(&stat_triple(landing.iter().map(|s| s.duration as f64)));
            v[10..13].copy_from_slice(&stat_triple(landing.iter().map(|s| s.velocity)));
            v[13] = mine.iter().map(|f| f.duration() as f64).sum::<f64>() / area;
            v[TEMPORAL_ORDER] = order.get(&id).copied().unwrap_or(1.0);
            Ok(PassageFeatureVector { note_id: roa.note_id, passage_id: id, features: v, label: Label::Unknown })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::{Page, Passage};
    use alloc::vec;

    fn layout() -> PageLayout {
        PageLayout::new(vec![Page {
            page: 1,
            w: 960.0,
            h: 1280.0,
            passages: vec![
                Passage { id: 1, page: 1, x: 0.0, y: 0.0, w: 500.0, h: 100.0 },
                Passage { id: 2, page: 1, x: 0.0, y: 200.0, w: 1000.0 / 2.0, h: 200.0 },
            ],
        }])
        .unwrap()
    }

    fn fix(start: Millis, dur: Millis, passage: u32) -> Fixation {
        Fixation { start, end: start + dur, cx: 10.0, cy: 10.0, page: 1, passage_id: Some(passage), samples: 10 }
    }

    const ROA: RegionOfAnalysis = RegionOfAnalysis { note_id: 3, roa_start: 0, roa_end: 10_000 };

    #[test]
    fn passage_without_fixations_is_zero_with_order_one() {
        let v = featurize_roa(&ROA, 5_000, &[], &[], &layout(), &[2]).unwrap();
        assert_eq!(v[0].features[..14], [0.0; 14]);
        assert_eq!(v[0].features[TEMPORAL_ORDER], 1.0);
    }

    #[test]
    fn fixation_statistics() {
        let fx = [fix(100, 120, 1), fix(400, 150, 1), fix(800, 300, 1)];
        let v = featurize_roa(&ROA, 5_000, &fx, &[], &layout(), &[1]).unwrap();
        let f = &v[0].features;
        assert!((f[0] - 6.0e-5).abs() < 1e-18);
        assert_eq!(&f[1..4], &[300.0, 120.0, 190.0]);
        assert_eq!(f[13], 570.0 / 50_000.0);
        assert_eq!(f[TEMPORAL_ORDER], 0.0);
    }

    #[test]
    fn singleton_triples_coincide() {
        let v = featurize_roa(&ROA, 5_000, &[fix(100, 180, 2)], &[], &layout(), &[1, 2]).unwrap();
        let f = &v[1].features;
        assert_eq!(f[1], f[2]);
        assert_eq!(f[2], f[3]);
    }

    #[test]
    fn empty_layout_rejected() {
        let empty = PageLayout::default();
        assert_eq!(featurize_roa(&ROA, 0, &[], &[], &empty, &[]), Err(Error::EmptyLayout));
    }

    #[test]
    fn temporal_order_endpoints() {
        // lag = 10000 - mean(first starts)
        let starts = BTreeMap::from([(1, vec![8_000]), (2, vec![-20_000])]);
        let order = temporal_order(&starts, 10_000);
        assert_eq!(order[&1], 0.0);
        assert_eq!(order[&2], 1.0);
    }

    #[test]
    fn temporal_order_midpoint() {
        let starts = BTreeMap::from([(1, vec![9_000]), (2, vec![5_000]), (3, vec![1_000]), (4, vec![])]);
        let order = temporal_order(&starts, 10_000);
        assert_eq!((order[&1], order[&2], order[&3], order[&4]), (0.0, 0.5, 1.0, 1.0));
    }

    #[test]
    fn temporal_order_uses_available_fixations() {
        let starts = BTreeMap::from([(1, vec![1_000, 2_000, 6_000]), (2, vec![0, 0, 0, 0, 0, 9_000])]);
        let order = temporal_order(&starts, 10_000);
        // lags: passage 1 = 10000 - 3000, passage 2 = 10000 - 0 (sixth ignored)
        assert_eq!(order[&1], 0.0);
        assert_eq!(order[&2], 1.0);
        let single = BTreeMap::from([(7, vec![4_000])]);
        assert_eq!(temporal_order(&single, 10_000)[&7], 0.0);
    }

    #[test]
    fn candidates_merge_sources() {
        let gaze = [
            DocGazeSample { t: 10, page: 1, x: 20.0, y: 250.0, on_screen: true },
            DocGazeSample { t: 20, page: 1, x: 20.0, y: 20.0, on_screen: false },
            DocGazeSample { t: 20_000, page: 1, x: 20.0, y: 20.0, on_screen: true },
        ];
        let ids = candidate_passages(&ROA, &gaze, &[], &layout(), &[]);
        assert_eq!(ids, vec![2]);
        let ids = candidate_passages(&ROA, &gaze, &[fix(50, 100, 1)], &layout(), &[2]);
        assert_eq!(ids, vec![1, 2]);
    }
}
