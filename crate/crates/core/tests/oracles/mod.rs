//! Brute-force reference implementations and random fixture generators shared
//! by the property tests and the acceptance suite.

#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use voxanchor_core::features::N_FEATURES;
use voxanchor_core::gaze::Fixation;
use voxanchor_core::layout::{DocGazeSample, Page, PageLayout, Passage};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------- I-DT

#[derive(Debug, Clone, PartialEq)]
pub struct RefFixation {
    pub start: i64,
    pub end: i64,
    pub page: u32,
    pub cx: f64,
    pub cy: f64,
    pub samples: usize,
}

fn dispersion(w: &[DocGazeSample]) -> f64 {
    let xs = w.iter().map(|s| s.x);
    let ys = w.iter().map(|s| s.y);
    let (x_lo, x_hi) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let (y_lo, y_hi) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    (x_hi - x_lo) + (y_hi - y_lo)
}

/// Textbook I-DT, recomputing every window from scratch; windows never span
/// a page change.
pub fn idt_reference(samples: &[DocGazeSample], dispersion_max: f64, duration_min: i64) -> Vec<RefFixation> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < samples.len() {
        // same-page run limit
        let mut run_end = i;
        while run_end < samples.len() && samples[run_end].page == samples[i].page {
            run_end += 1;
        }
        let Some(j) = (i..run_end).find(|&j| samples[j].t - samples[i].t >= duration_min) else {
            i = run_end;
            continue;
        };
        if dispersion(&samples[i..=j]) > dispersion_max {
            i += 1;
            continue;
        }
        let mut k = j;
        while k + 1 < run_end && dispersion(&samples[i..=k + 1]) <= dispersion_max {
            k += 1;
        }
        let w = &samples[i..=k];
        let n = w.len() as f64;
        out.push(RefFixation {
            start: w[0].t,
            end: w[w.len() - 1].t,
            page: w[0].page,
            cx: w.iter().map(|s| s.x).sum::<f64>() / n,
            cy: w.iter().map(|s| s.y).sum::<f64>() / n,
            samples: w.len(),
        });
        i = k + 1;
    }
    out
}

/// Gaze with clustered dwells, jumps, irregular timing and page changes.
pub fn random_trace(r: &mut ChaCha8Rng, max_len: usize) -> Vec<DocGazeSample> {
    let n = r.random_range(0..=max_len);
    let mut out = Vec::with_capacity(n);
    let mut t: i64 = r.random_range(0..50);
    let mut page = 1u32;
    while out.len() < n {
        let (cx, cy) = (r.random_range(0.0..900.0), r.random_range(0.0..1200.0));
        let spread = if r.random_bool(0.7) { r.random_range(0.5..10.0) } else { r.random_range(10.0..60.0) };
        let len = r.random_range(1..=30);
        if r.random_bool(0.08) {
            page = r.random_range(1..=3);
        }
        for _ in 0..len {
            if out.len() == n {
                break;
            }
            out.push(DocGazeSample {
                t,
                page,
                x: cx + r.random_range(-spread..=spread),
                y: cy + r.random_range(-spread..=spread),
                on_screen: true,
            });
            t += match r.random_range(0..10) {
                0 => 0,
                1 => r.random_range(20..60),
                _ => r.random_range(8..14),
            };
        }
    }
    out
}

pub fn same_fixations(got: &[Fixation], want: &[RefFixation], tol: f64) -> Result<(), String> {
    if got.len() != want.len() {
        return Err(format!("{} fixations, reference has {}", got.len(), want.len()));
    }
    for (k, (g, w)) in got.iter().zip(want).enumerate() {
        if (g.start, g.end, g.page, g.samples) != (w.start, w.end, w.page, w.samples) {
            return Err(format!("fixation {k}: {g:?} vs {w:?}"));
        }
        if (g.cx - w.cx).abs() > tol || (g.cy - w.cy).abs() > tol {
            return Err(format!("fixation {k}: centroid {:?} vs {:?}", (g.cx, g.cy), (w.cx, w.cy)));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------- AUC

/// Fraction of (positive, negative) pairs ranked correctly, ties counting half.
pub fn auc_all_pairs(scores: &[f64], truth: &[bool]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for (i, &ti) in truth.iter().enumerate() {
        if !ti {
            continue;
        }
        for (j, &tj) in truth.iter().enumerate() {
            if tj {
                continue;
            }
            pairs += 1.0;
            if scores[i] > scores[j] {
                wins += 1.0;
            } else if scores[i] == scores[j] {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

/// Scores (often tied) and labels with both classes present.
pub fn random_scored(r: &mut ChaCha8Rng, max_len: usize) -> (Vec<f64>, Vec<bool>) {
    let n = r.random_range(2..=max_len);
    let discrete = r.random_bool(0.5);
    let p = r.random_range(0.05..0.95);
    let scores: Vec<f64> = (0..n)
        .map(|_| if discrete { f64::from(r.random_range(0u32..6)) / 5.0 } else { r.random::<f64>() })
        .collect();
    let mut truth: Vec<bool> = (0..n).map(|_| r.random_bool(p)).collect();
    truth[0] = true;
    truth[1] = false;
    (scores, truth)
}

// ---------------------------------------------------------------- features

pub struct FeatureFixture {
    pub layout: PageLayout,
    /// Time-ordered, passages assigned.
    pub fixations: Vec<Fixation>,
    pub candidates: Vec<u32>,
    pub roa_start: i64,
    pub roa_end: i64,
    pub note_start: i64,
}

pub fn random_feature_fixture(r: &mut ChaCha8Rng) -> FeatureFixture {
    let n_passages = r.random_range(1..=5u32);
    let mut passages = Vec::new();
    let mut y = 40.0;
    for id in 0..n_passages {
        let h = r.random_range(20.0..200.0);
        let w = r.random_range(100.0..800.0);
        passages.push(Passage { id: id * 3 + 1, page: 1, x: r.random_range(0.0..100.0), y, w, h });
        y += h + r.random_range(5.0..40.0);
    }
    let layout = PageLayout::new(vec![Page { page: 1, w: 960.0, h: y + 40.0, passages: passages.clone() }]).unwrap();

    let roa_start = r.random_range(0..10_000);
    let mut t = roa_start;
    let mut fixations = Vec::new();
    for _ in 0..r.random_range(0..40) {
        t += r.random_range(0..120);
        let dur = r.random_range(0..600);
        let p = passages[r.random_range(0..passages.len())];
        fixations.push(Fixation {
            start: t,
            end: t + dur,
            cx: p.x + r.random_range(0.0..p.w),
            cy: p.y + r.random_range(0.0..p.h),
            page: 1,
            passage_id: Some(p.id),
            samples: 1 + (dur / 11) as usize,
        });
        t += dur;
    }
    let roa_end = t + r.random_range(1..5_000);
    let note_start = r.random_range(roa_start..=roa_end);

    let mut candidates: Vec<u32> = passages.iter().map(|p| p.id).filter(|_| r.random_bool(0.7)).collect();
    if candidates.is_empty() {
        candidates.push(passages[0].id);
    }
    FeatureFixture { layout, fixations, candidates, roa_start, roa_end, note_start }
}

/// Single-pass reference for the fifteen per-passage features, deriving
/// saccades directly from consecutive fixations.
pub fn features_reference(fx: &FeatureFixture) -> BTreeMap<u32, [f64; N_FEATURES]> {
    #[derive(Default)]
    struct Acc {
        fix_n: usize,
        fix_dur: Vec<f64>,
        sac_len: Vec<f64>,
        sac_dur: Vec<f64>,
        sac_vel: Vec<f64>,
        starts: Vec<i64>,
    }
    let mut acc: BTreeMap<u32, Acc> = fx.candidates.iter().map(|&id| (id, Acc::default())).collect();
    let mut prev: Option<&Fixation> = None;
    for f in &fx.fixations {
        let id = f.passage_id.unwrap();
        if let Some(a) = acc.get_mut(&id) {
            a.fix_n += 1;
            a.fix_dur.push((f.end - f.start) as f64);
            a.starts.push(f.start);
            if let Some(p) = prev {
                let len = ((f.cx - p.cx).powi(2) + (f.cy - p.cy).powi(2)).sqrt();
                let dur = std::cmp::max(f.start - p.end, 1) as f64;
                a.sac_len.push(len);
                a.sac_dur.push(dur);
                a.sac_vel.push(len / dur);
            }
        }
        prev = Some(f);
    }

    let triple = |v: &[f64]| -> [f64; 3] {
        if v.is_empty() {
            return [0.0; 3];
        }
        let max = v.iter().cloned().fold(f64::MIN, f64::max);
        let min = v.iter().cloned().fold(f64::MAX, f64::min);
        [max, min, v.iter().sum::<f64>() / v.len() as f64]
    };

    let lag: BTreeMap<u32, f64> = acc
        .iter()
        .filter(|(_, a)| !a.starts.is_empty())
        .map(|(&id, a)| {
            let mut s = a.starts.clone();
            s.sort();
            let first: Vec<i64> = s.into_iter().take(5).collect();
            let mean = first.iter().map(|&v| v as f64).sum::<f64>() / first.len() as f64;
            (id, fx.note_start as f64 - mean)
        })
        .collect();
    let lo = lag.values().cloned().fold(f64::MAX, f64::min);
    let hi = lag.values().cloned().fold(f64::MIN, f64::max);

    acc.iter()
        .map(|(&id, a)| {
            let p = fx.layout.passage(id).unwrap();
            let area = p.w * p.h;
            let mut v = [0.0; N_FEATURES];
            v[0] = a.fix_n as f64 / area;
            v[1..4].copy_from_slice(&triple(&a.fix_dur));
            v[4..7].copy_from_slice(&triple(&a.sac_len));
            v[7..10].copy_from_slice(&triple(&a.sac_dur));
            v[10..13].copy_from_slice(&triple(&a.sac_vel));
            v[13] = a.fix_dur.iter().sum::<f64>() / area;
            v[14] = match lag.get(&id) {
                None => 1.0,
                Some(_) if lag.len() == 1 || hi == lo => 0.0,
                Some(d) => (d - lo) / (hi - lo),
            };
            (id, v)
        })
        .collect()
}

pub fn close_rel(a: f64, b: f64, rel: f64) -> bool {
    let scale = a.abs().max(b.abs());
    (a - b).abs() <= rel * scale || (a - b).abs() <= 1e-300
}

// ---------------------------------------------------------------- CART

pub enum RefNode {
    Leaf([f64; 2]),
    Split { feature: usize, threshold: f64, left: Box<RefNode>, right: Box<RefNode> },
}

impl RefNode {
    pub fn proba(&self, x: &[f64; N_FEATURES]) -> f64 {
        match self {
            RefNode::Leaf(w) => w[1] / (w[0] + w[1]),
            RefNode::Split { feature, threshold, left, right } => {
                if x[*feature] <= *threshold {
                    left.proba(x)
                } else {
                    right.proba(x)
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            RefNode::Leaf(_) => 0,
            RefNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }
}

fn gini_purity(w: [f64; 2]) -> f64 {
    let t = w[0] + w[1];
    if t > 0.0 {
        (w[0] * w[0] + w[1] * w[1]) / t
    } else {
        0.0
    }
}

/// Recursive CART over all features: weighted Gini, midpoint thresholds,
/// first-best split wins (lowest feature, then lowest threshold).
pub fn cart_reference(
    x: &[[f64; N_FEATURES]],
    y: &[bool],
    rows: &[usize],
    cw: [f64; 2],
    min_leaf: usize,
    max_depth: Option<usize>,
    depth: usize,
) -> RefNode {
    let count = |rs: &[usize]| {
        let pos = rs.iter().filter(|&&r| y[r]).count();
        [rs.len() - pos, pos]
    };
    let c = count(rows);
    let weights = [c[0] as f64 * cw[0], c[1] as f64 * cw[1]];
    if c[0] == 0 || c[1] == 0 || max_depth.is_some_and(|d| depth >= d) || rows.len() < 2 * min_leaf {
        return RefNode::Leaf(weights);
    }
    let mut best: Option<(f64, usize, f64)> = None;
    for f in 0..N_FEATURES {
        let mut values: Vec<f64> = rows.iter().map(|&r| x[r][f]).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for pair in values.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let mut thr = a + (b - a) / 2.0;
            if thr >= b {
                thr = a;
            }
            let left: Vec<usize> = rows.iter().copied().filter(|&r| x[r][f] <= thr).collect();
            let right: Vec<usize> = rows.iter().copied().filter(|&r| x[r][f] > thr).collect();
            if left.len() < min_leaf || right.len() < min_leaf {
                continue;
            }
            let (lc, rc) = (count(&left), count(&right));
            let score = gini_purity([lc[0] as f64 * cw[0], lc[1] as f64 * cw[1]])
                + gini_purity([rc[0] as f64 * cw[0], rc[1] as f64 * cw[1]]);
            if best.is_none_or(|(s, _, _)| score > s) {
                best = Some((score, f, thr));
            }
        }
    }
    let Some((_, feature, threshold)) = best else { return RefNode::Leaf(weights) };
    let left: Vec<usize> = rows.iter().copied().filter(|&r| x[r][feature] <= threshold).collect();
    let right: Vec<usize> = rows.iter().copied().filter(|&r| x[r][feature] > threshold).collect();
    RefNode::Split {
        feature,
        threshold,
        left: Box::new(cart_reference(x, y, &left, cw, min_leaf, max_depth, depth + 1)),
        right: Box::new(cart_reference(x, y, &right, cw, min_leaf, max_depth, depth + 1)),
    }
}

/// Balanced class weights over the given labels.
pub fn balanced_weights(y: &[bool]) -> [f64; 2] {
    let pos = y.iter().filter(|&&v| v).count();
    let counts = [y.len() - pos, pos];
    std::array::from_fn(|c| if counts[c] > 0 { y.len() as f64 / (2.0 * counts[c] as f64) } else { 1.0 })
}

/// Small-integer features (so ties and repeated values occur) with a label
/// that depends on a few of them plus optional noise. Both classes present.
pub fn random_dataset(r: &mut ChaCha8Rng, n: usize, noise: f64) -> (Vec<[f64; N_FEATURES]>, Vec<bool>) {
    let x: Vec<[f64; N_FEATURES]> =
        (0..n).map(|_| std::array::from_fn(|_| f64::from(r.random_range(0u32..8)) * 0.5)).collect();
    let mut y: Vec<bool> = x.iter().map(|v| v[0] + v[3] > v[7] + 1.0 || r.random_bool(noise)).collect();
    y[0] = true;
    y[1] = false;
    (x, y)
}

/// Drops rows whose feature vector repeats an earlier one with a different
/// label, so a fully grown tree can separate everything.
pub fn conflict_free(x: Vec<[f64; N_FEATURES]>, y: Vec<bool>) -> (Vec<[f64; N_FEATURES]>, Vec<bool>) {
    let mut seen: Vec<([f64; N_FEATURES], bool)> = Vec::new();
    for (xi, yi) in x.into_iter().zip(y) {
        if let Some((_, l)) = seen.iter().find(|(v, _)| *v == xi) {
            if *l != yi {
                continue;
            }
        }
        seen.push((xi, yi));
    }
    seen.into_iter().unzip()
}
