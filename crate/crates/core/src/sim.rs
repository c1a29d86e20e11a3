//! Seeded generator of labeled reading sessions.
//!
//! A simulated reader works through the document in reading order, fixating
//! left to right along each line. Before each voice note it reads zero or
//! more lead-in passages and then the note's target passages; during the
//! utterance its gaze dwells in episodes, each on a target with probability
//! equal to the note type's adherence and otherwise on a uniformly chosen
//! visible passage. Audio is produced as a level envelope (or optionally a
//! tone waveform) that is loud exactly while a note is spoken.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::layout::{visible_passages, Page, PageLayout, Passage};
use crate::types::{AudioTrack, EnvelopePoint, GazeSample, Millis, NoteType, ScrollEvent, Session, Viewport};

/// Height of one text line in document pixels.
pub const LINE_PX: f64 = 28.0;
pub const PAGE_W: f64 = 960.0;
pub const PAGE_H: f64 = 1280.0;
/// Sample rate of the optional synthesized waveform.
pub const WAVEFORM_RATE: u32 = 8000;

const ENVELOPE_FRAME_MS: Millis = 10;
const MIN_FIXATION_MS: f64 = 120.0;
const MAX_FIXATION_MS: f64 = 600.0;
/// Consecutive fixations are kept at least this far apart (|dx| + |dy|).
const MIN_SACCADE_PX: f64 = 24.0;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct TypeProfile {
    /// Utterance length range, ms.
    pub note_ms: [Millis; 2],
    /// Probability that a gaze episode during the note lands on a target.
    pub adherence: f64,
    /// Length range of one gaze episode during the utterance, ms.
    pub dwell_ms: [Millis; 2],
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct BehaviorProfile {
    /// Note type weights: short, reflective, summary.
    pub mix: [f64; 3],
    /// Saccade transit speed, px/ms.
    pub reading_speed: f64,
    pub fixation_mean_ms: f64,
    pub fixation_sd_ms: f64,
    /// Within-line saccade length.
    pub saccade_px: f64,
    pub saccade_sd_px: f64,
    pub short: TypeProfile,
    pub reflective: TypeProfile,
    pub summary: TypeProfile,
    /// Upper bound on passages read between the previous note and the targets.
    pub lead_in_max: usize,
    pub jitter_px: f64,
    /// SD of the per-participant constant calibration offset.
    pub calibration_sd_px: f64,
    /// Fraction of samples lost off screen.
    pub off_screen_rate: f64,
    pub sample_interval_ms: Millis,
    pub viewport_w: f64,
    pub viewport_h: f64,
    pub pages: u32,
    /// Emit 16-bit PCM instead of a precomputed envelope.
    pub waveform: bool,
}

impl Default for BehaviorProfile {
    fn default() -> Self {
        BehaviorProfile {
            mix: [0.57, 0.26, 0.17],
            reading_speed: 4.0,
            fixation_mean_ms: 220.0,
            fixation_sd_ms: 60.0,
            saccade_px: 30.0,
            saccade_sd_px: 6.0,
            short: TypeProfile { note_ms: [4_000, 8_000], adherence: 0.9, dwell_ms: [200, 600] },
            reflective: TypeProfile { note_ms: [8_000, 20_000], adherence: 0.3, dwell_ms: [1_500, 4_000] },
            summary: TypeProfile { note_ms: [15_000, 40_000], adherence: 0.6, dwell_ms: [800, 2_000] },
            lead_in_max: 2,
            jitter_px: 1.5,
            calibration_sd_px: 8.0,
            off_screen_rate: 0.005,
            sample_interval_ms: 11,
            viewport_w: 960.0,
            viewport_h: 720.0,
            pages: 8,
            waveform: false,
        }
    }
}

impl BehaviorProfile {
    /// Every note of one type.
    pub fn only(ty: NoteType) -> Self {
        let mut p = BehaviorProfile::default();
        p.mix = match ty {
            NoteType::Short => [1.0, 0.0, 0.0],
            NoteType::Reflective => [0.0, 1.0, 0.0],
            NoteType::Summary => [0.0, 0.0, 1.0],
        };
        p
    }

    pub fn of(&self, ty: NoteType) -> &TypeProfile {
        match ty {
            NoteType::Short => &self.short,
            NoteType::Reflective => &self.reflective,
            NoteType::Summary => &self.summary,
        }
    }

    pub fn of_mut(&mut self, ty: NoteType) -> &mut TypeProfile {
        match ty {
            NoteType::Short => &mut self.short,
            NoteType::Reflective => &mut self.reflective,
            NoteType::Summary => &mut self.summary,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.mix.iter().any(|w| !(*w >= 0.0)) || libm::fabs(self.mix.iter().sum::<f64>() - 1.0) > 1e-9 {
            return bad(format!("note type weights must be non-negative and sum to 1, got {:?}", self.mix));
        }
        for ty in NoteType::ALL {
            let p = self.of(ty);
            if !(0.0..=1.0).contains(&p.adherence) {
                return bad(format!("{ty} adherence must lie in [0, 1]"));
            }
            if p.note_ms[0] < ENVELOPE_FRAME_MS || p.note_ms[0] > p.note_ms[1] {
                return bad(format!("{ty} note length range is invalid"));
            }
            if p.dwell_ms[0] <= 0 || p.dwell_ms[0] > p.dwell_ms[1] {
                return bad(format!("{ty} dwell range is invalid"));
            }
        }
        let positive = [
            ("reading_speed", self.reading_speed),
            ("fixation_mean_ms", self.fixation_mean_ms),
            ("saccade_px", self.saccade_px),
            ("viewport_w", self.viewport_w),
            ("viewport_h", self.viewport_h),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive"));
            }
        }
        let non_negative = [
            ("fixation_sd_ms", self.fixation_sd_ms),
            ("saccade_sd_px", self.saccade_sd_px),
            ("jitter_px", self.jitter_px),
            ("calibration_sd_px", self.calibration_sd_px),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!("{name} must be non-negative"));
            }
        }
        if !(0.0..0.5).contains(&self.off_screen_rate) {
            return bad("off_screen_rate must lie in [0, 0.5)".into());
        }
        if self.sample_interval_ms <= 0 {
            return bad("sample_interval_ms must be positive".into());
        }
        if self.pages == 0 {
            return bad("pages must be positive".into());
        }
        Ok(())
    }
}

/// A note as it was generated.
#[derive(Debug, Clone, PartialEq)]
pub struct SimNote {
    pub note_id: u32,
    pub note_type: NoteType,
    pub start: Millis,
    pub end: Millis,
    pub targets: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimSession {
    /// Ground truth filled in.
    pub session: Session,
    pub notes: Vec<SimNote>,
    /// Number of fixations the generator placed.
    pub injected_fixations: usize,
}

impl SimSession {
    pub fn note_types(&self) -> BTreeMap<u32, NoteType> {
        self.notes.iter().map(|n| (n.note_id, n.note_type)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimCorpus {
    pub seed: u64,
    pub participants: Vec<SimSession>,
}

/// Seed of participant `index` under a master seed.
pub fn participant_seed(master: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master) ^ index)
}

/// Seed of document `index` under a master seed; disjoint from participant seeds
/// by construction of the mixing constant.
pub fn layout_seed(master: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master ^ 0x6c61_796f_7574_0000) ^ index)
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A document of stacked paragraph rectangles on fixed-size pages.
pub fn generate_layout(seed: u64, pages: u32) -> PageLayout {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut id = 0u32;
    let pages = (1..=pages)
        .map(|page| {
            let mut passages = Vec::new();
            let mut y = 80.0;
            loop {
                let lines: u32 = rng.random_range(2..=5);
                let h = f64::from(lines) * LINE_PX;
                if y + h > PAGE_H - 80.0 {
                    break;
                }
                let x = 80.0 + f64::from(rng.random_range(0u32..=40));
                let w = f64::from(rng.random_range(380u32..=800));
                passages.push(Passage { id, page, x, y, w, h });
                id += 1;
                y += h + f64::from(rng.random_range(24u32..=60));
            }
            Page { page, w: PAGE_W, h: PAGE_H, passages }
        })
        .collect();
    PageLayout { pages }
}

/// `count` documents derived from a master seed.
pub fn default_layouts(master: u64, count: usize, pages: u32) -> Vec<PageLayout> {
    (0..count as u64).map(|i| generate_layout(layout_seed(master, i), pages)).collect()
}

fn sample_type(rng: &mut ChaCha8Rng, mix: &[f64; 3]) -> NoteType {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (ty, w) in NoteType::ALL.into_iter().zip(mix) {
        acc += w;
        if u < acc {
            return ty;
        }
    }
    // rounding: fall back to the last type with weight
    NoteType::ALL.into_iter().zip(mix).rev().find(|(_, w)| **w > 0.0).map_or(NoteType::Short, |(t, _)| t)
}

fn range(rng: &mut ChaCha8Rng, r: [Millis; 2]) -> Millis {
    if r[0] >= r[1] {
        r[0]
    } else {
        rng.random_range(r[0]..=r[1])
    }
}

fn ceil_to(t: Millis, step: Millis) -> Millis {
    (t + step - 1).div_euclid(step) * step
}

struct Reader<'a> {
    rng: ChaCha8Rng,
    profile: &'a BehaviorProfile,
    layout: &'a PageLayout,
    viewport: Viewport,
    fixation_ms: Normal<f64>,
    saccade_px: Normal<f64>,
    jitter: Normal<f64>,
    offset: (f64, f64),
    t: Millis,
    next_sample: Millis,
    page: u32,
    scroll_y: f64,
    /// Last fixation in document and measured-screen coordinates.
    last_doc: (u32, f64, f64),
    last_screen: (f64, f64),
    gaze: Vec<GazeSample>,
    scrolls: Vec<ScrollEvent>,
    injected: usize,
}

impl Reader<'_> {
    fn screen(&self, x: f64, y: f64) -> (f64, f64) {
        (x + self.offset.0, y - self.scroll_y + self.offset.1)
    }

    fn page_h(&self, page: u32) -> f64 {
        self.layout.page(page).map_or(PAGE_H, |p| p.h)
    }

    /// Scrolls so a line at document `y` on `page` sits comfortably in view.
    fn bring_into_view(&mut self, page: u32, y: f64) {
        let vh = self.viewport.h;
        let screen_y = y - self.scroll_y;
        if page == self.page && screen_y >= 0.15 * vh && screen_y <= 0.85 * vh {
            return;
        }
        let max_scroll = (self.page_h(page) - vh).max(0.0);
        let target = libm::round((y - 0.2 * vh).clamp(0.0, max_scroll));
        if page == self.page && target == self.scroll_y {
            return;
        }
        self.page = page;
        self.scroll_y = target;
        let ev = ScrollEvent { t: self.t, page, scroll_y: target };
        match self.scrolls.last_mut() {
            Some(last) if last.t == self.t => *last = ev,
            _ => self.scrolls.push(ev),
        }
    }

    fn emit(&mut self, until: Millis, at: impl Fn(f64) -> (f64, f64)) {
        let from = self.t;
        let span = (until - from).max(1) as f64;
        while self.next_sample < until {
            let st = self.next_sample;
            self.next_sample += self.profile.sample_interval_ms;
            if self.rng.random::<f64>() < self.profile.off_screen_rate {
                self.gaze.push(GazeSample { t: st, x: -40.0, y: self.viewport.h * 0.5 });
                continue;
            }
            let (x, y) = at((st - from) as f64 / span);
            let jx = self.jitter.sample(&mut self.rng);
            let jy = self.jitter.sample(&mut self.rng);
            self.gaze.push(GazeSample { t: st, x: x + jx, y: y + jy });
        }
        self.t = until;
    }

    fn fixation_duration(&mut self) -> Millis {
        libm::round(self.fixation_ms.sample(&mut self.rng).clamp(MIN_FIXATION_MS, MAX_FIXATION_MS)) as Millis
    }

    /// Saccade to a document point (scrolling first if needed) and fixate there.
    fn fixate(&mut self, page: u32, x: f64, y: f64, scroll: bool) {
        if scroll {
            self.bring_into_view(page, y);
        }
        let to = self.screen(x, y);
        let from = self.last_screen;
        let dist = libm::hypot(to.0 - from.0, to.1 - from.1);
        let transit = libm::round((dist / self.profile.reading_speed).clamp(11.0, 80.0)) as Millis;
        self.emit(self.t + transit, |f| (from.0 + (to.0 - from.0) * f, from.1 + (to.1 - from.1) * f));
        let dur = self.fixation_duration();
        self.emit(self.t + dur, |_| to);
        self.last_doc = (page, x, y);
        self.last_screen = to;
        self.injected += 1;
    }

    fn saccade_step(&mut self) -> f64 {
        self.saccade_px.sample(&mut self.rng).clamp(MIN_SACCADE_PX, 2.5 * self.profile.saccade_px.max(MIN_SACCADE_PX))
    }

    fn read_line(&mut self, p: &Passage, line: u32) {
        let y = p.y + LINE_PX * (f64::from(line) + 0.5);
        let mut x = p.x + f64::from(self.rng.random_range(4u32..=16));
        while x <= p.right() - 8.0 {
            self.fixate(p.page, x, y, true);
            x += self.saccade_step();
        }
    }

    fn read_passage(&mut self, p: &Passage) {
        let lines = libm::round(p.h / LINE_PX).max(1.0) as u32;
        for line in 0..lines {
            self.read_line(p, line);
        }
    }

    /// A short look back at one line of `p` before speaking.
    fn reread(&mut self, p: &Passage) {
        let lines = libm::round(p.h / LINE_PX).max(1.0) as u32;
        let line = self.rng.random_range(0..lines);
        let y = p.y + LINE_PX * (f64::from(line) + 0.5);
        let n = self.rng.random_range(3..=6);
        let mut x = p.x + f64::from(self.rng.random_range(4u32..=40));
        for _ in 0..n {
            if x > p.right() - 8.0 {
                break;
            }
            self.fixate(p.page, x, y, true);
            x += self.saccade_step();
        }
    }

    /// A random fixation point inside the on-screen part of `p`, at least a
    /// saccade away from the previous fixation.
    fn point_in_view(&mut self, p: &Passage) -> (f64, f64) {
        let top = p.y.max(self.scroll_y + 12.0) + 4.0;
        let bottom = p.bottom().min(self.scroll_y + self.viewport.h - 12.0) - 4.0;
        let (y_lo, y_hi) = if top < bottom { (top, bottom) } else { (top.min(bottom), top.min(bottom) + 1.0) };
        let (x_lo, x_hi) = (p.x + 4.0, p.right() - 4.0);
        let (lp, lx, ly) = self.last_doc;
        let mut point = (x_lo, y_lo);
        for _ in 0..16 {
            point = (self.rng.random_range(x_lo..x_hi), self.rng.random_range(y_lo..y_hi));
            if lp != p.page || libm::fabs(point.0 - lx) + libm::fabs(point.1 - ly) >= MIN_SACCADE_PX + 6.0 {
                return point;
            }
        }
        // nudge sideways to guarantee separation
        let dx = if lx + 40.0 <= x_hi { 40.0 } else { -40.0 };
        (lx + dx, point.1)
    }

    fn utter(&mut self, targets: &[u32], tp: &TypeProfile, end: Millis) {
        let state = ScrollEvent { t: self.t, page: self.page, scroll_y: self.scroll_y };
        let visible = visible_passages(self.layout, &state, self.viewport).unwrap_or_default();
        let on_screen_targets: Vec<u32> = targets.iter().copied().filter(|id| visible.contains(id)).collect();
        if visible.is_empty() {
            while self.t < end {
                let (page, x, y) = self.last_doc;
                self.fixate(page, x + MIN_SACCADE_PX + 6.0, y, true);
            }
            return;
        }
        while self.t < end {
            let episode_end = self.t + range(&mut self.rng, tp.dwell_ms);
            let on_target = !on_screen_targets.is_empty() && self.rng.random::<f64>() < tp.adherence;
            let pool = if on_target { &on_screen_targets } else { &visible };
            let id = pool[self.rng.random_range(0..pool.len())];
            let Some(p) = self.layout.passage(id).copied() else { continue };
            loop {
                let (x, y) = self.point_in_view(&p);
                self.fixate(p.page, x, y, false);
                if self.t >= episode_end || self.t >= end {
                    break;
                }
            }
        }
    }
}

/// Generates one participant's session together with its ground truth.
pub fn simulate_participant(
    participant_id: &str,
    layout: &PageLayout,
    profile: &BehaviorProfile,
    n_notes: usize,
    seed: u64,
) -> Result<SimSession> {
    profile.validate()?;
    layout.validate()?;
    let order = layout.reading_order();
    if order.len() < 2 {
        return Err(Error::LayoutTooSmall(format!("{} passages; at least 2 are needed", order.len())));
    }
    if n_notes == 0 {
        return Err(Error::Config("at least one note per participant is required".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let calib = Normal::new(0.0, profile.calibration_sd_px).map_err(|_| Error::Config("bad calibration sd".into()))?;
    let offset = (calib.sample(&mut rng), calib.sample(&mut rng));
    let viewport = Viewport { w: profile.viewport_w, h: profile.viewport_h };
    let mut reader = Reader {
        fixation_ms: Normal::new(profile.fixation_mean_ms, profile.fixation_sd_ms)
            .map_err(|_| Error::Config("bad fixation distribution".into()))?,
        saccade_px: Normal::new(profile.saccade_px, profile.saccade_sd_px)
            .map_err(|_| Error::Config("bad saccade distribution".into()))?,
        jitter: Normal::new(0.0, profile.jitter_px).map_err(|_| Error::Config("bad jitter".into()))?,
        rng,
        profile,
        layout,
        viewport,
        offset,
        t: 0,
        next_sample: 0,
        page: order[0].page,
        scroll_y: 0.0,
        last_doc: (order[0].page, order[0].x, order[0].y),
        last_screen: (order[0].x + offset.0, order[0].y + offset.1),
        gaze: Vec::new(),
        scrolls: alloc::vec![ScrollEvent { t: 0, page: order[0].page, scroll_y: 0.0 }],
        injected: 0,
    };

    let mut cursor = 0usize;
    let mut notes = Vec::with_capacity(n_notes);
    for note_id in 0..n_notes as u32 {
        let ty = sample_type(&mut reader.rng, &profile.mix);
        let tp = *profile.of(ty);
        let lead_in = reader.rng.random_range(0..=profile.lead_in_max);
        for _ in 0..lead_in {
            reader.read_passage(&order[cursor % order.len()]);
            cursor += 1;
        }
        let n_targets = match ty {
            NoteType::Summary => reader.rng.random_range(2..=3usize).min(order.len()),
            _ => 1,
        };
        let mut targets = Vec::with_capacity(n_targets);
        for _ in 0..n_targets {
            let p = order[cursor % order.len()];
            reader.read_passage(&p);
            targets.push(p.id);
            cursor += 1;
        }
        if reader.rng.random::<f64>() < tp.adherence {
            let pick = targets[reader.rng.random_range(0..targets.len())];
            if let Some(p) = layout.passage(pick).copied() {
                reader.reread(&p);
            }
        }
        let start = ceil_to(reader.t, ENVELOPE_FRAME_MS);
        let end = start + ceil_to(range(&mut reader.rng, tp.note_ms), ENVELOPE_FRAME_MS);
        reader.utter(&targets, &tp, end);
        targets.sort_unstable();
        notes.push(SimNote { note_id, note_type: ty, start, end, targets });
    }
    // trailing reading keeps the last note clear of the session end
    reader.read_passage(&order[cursor % order.len()]);

    let session_end = ceil_to(reader.t.max(reader.next_sample), ENVELOPE_FRAME_MS);
    let envelope = synthesize_envelope(&mut reader.rng, &notes, session_end);
    let audio = if profile.waveform {
        AudioTrack::Pcm { sample_rate: WAVEFORM_RATE, samples: synthesize_waveform(&envelope) }
    } else {
        AudioTrack::Envelope(envelope)
    };
    let ground_truth = notes.iter().map(|n| (n.note_id, n.targets.iter().copied().collect::<BTreeSet<u32>>())).collect();
    let injected_fixations = reader.injected;
    Ok(SimSession {
        session: Session {
            participant_id: participant_id.into(),
            gaze: reader.gaze,
            scrolls: reader.scrolls,
            layout: layout.clone(),
            viewport,
            audio,
            ground_truth: Some(ground_truth),
        },
        notes,
        injected_fixations,
    })
}

/// Speech at about -20 dBFS with brief pauses, silence at about -60 dBFS.
fn synthesize_envelope(rng: &mut ChaCha8Rng, notes: &[SimNote], end: Millis) -> Vec<EnvelopePoint> {
    let mut speech = Vec::new();
    for n in notes {
        // pauses shorter than the merge gap, away from the note edges
        let mut dips = Vec::new();
        let mut t = n.start + 1_000 + 10 * rng.random_range(0..100);
        while t + 500 < n.end {
            let len = 10 * rng.random_range(10..=30);
            dips.push((t, t + len));
            t += len + 10 * rng.random_range(150..=300);
        }
        speech.push((n.start, n.end, dips));
    }
    let mut out = Vec::with_capacity((end / ENVELOPE_FRAME_MS) as usize);
    let mut k = 0;
    let mut t = 0;
    while t < end {
        while k < speech.len() && speech[k].1 <= t {
            k += 1;
        }
        let talking = speech.get(k).is_some_and(|(s, e, dips)| {
            *s <= t && t < *e && !dips.iter().any(|(a, b)| *a <= t && t < *b)
        });
        let (level, spread): (f64, f64) = if talking { (-20.0, 2.0) } else { (-60.0, 2.0) };
        let noise = rng.random_range(-spread..=spread) + rng.random_range(-spread..=spread);
        out.push(EnvelopePoint { t, db: level + noise * 0.5 });
        t += ENVELOPE_FRAME_MS;
    }
    out
}

/// A tone whose per-frame RMS follows the envelope.
fn synthesize_waveform(envelope: &[EnvelopePoint]) -> Vec<i16> {
    let per_frame = (WAVEFORM_RATE as i64 * ENVELOPE_FRAME_MS / 1000) as usize;
    let mut out = Vec::with_capacity(envelope.len() * per_frame);
    // 500 Hz fits exactly 5 cycles into each 10 ms frame
    let step = 2.0 * core::f64::consts::PI * 500.0 / f64::from(WAVEFORM_RATE);
    for p in envelope {
        let amp = libm::pow(10.0, p.db / 20.0) * core::f64::consts::SQRT_2;
        for i in 0..per_frame {
            let v = amp * libm::sin(step * i as f64) * 32767.0;
            out.push(libm::round(v).clamp(-32768.0, 32767.0) as i16);
        }
    }
    out
}

/// Participant `i` reads `layouts[i % layouts.len()]` with a derived seed.
pub fn simulate_corpus(
    layouts: &[PageLayout],
    n_participants: usize,
    n_notes: usize,
    profile: &BehaviorProfile,
    seed: u64,
) -> Result<SimCorpus> {
    let participants = (0..n_participants)
        .map(|i| simulate_indexed(layouts, i, n_notes, profile, seed))
        .collect::<Result<Vec<_>>>()?;
    Ok(SimCorpus { seed, participants })
}

/// Participant `index` of the corpus defined by `layouts` and `seed`.
pub fn simulate_indexed(
    layouts: &[PageLayout],
    index: usize,
    n_notes: usize,
    profile: &BehaviorProfile,
    seed: u64,
) -> Result<SimSession> {
    if layouts.is_empty() {
        return Err(Error::Config("no layouts to simulate on".into()));
    }
    simulate_participant(
        &participant_name(index),
        &layouts[index % layouts.len()],
        profile,
        n_notes,
        participant_seed(seed, index as u64),
    )
}

pub fn participant_name(index: usize) -> String {
    format!("P{:02}", index + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio::AudioConfig;
    use crate::pipeline::session_notes;
    use crate::session::{normalize_session, validate_session};

    fn small(ty: Option<NoteType>, n: usize, seed: u64) -> SimSession {
        let profile = ty.map_or_else(BehaviorProfile::default, BehaviorProfile::only);
        simulate_participant("P01", &generate_layout(3, 4), &profile, n, seed).unwrap()
    }

    #[test]
    fn deterministic() {
        assert_eq!(small(None, 5, 9), small(None, 5, 9));
        assert_ne!(small(None, 5, 9).session.gaze, small(None, 5, 10).session.gaze);
    }

    #[test]
    fn sessions_are_valid() {
        let s = small(None, 8, 2);
        let normalized = normalize_session(s.session.clone()).unwrap();
        assert_eq!(normalized, s.session);
        assert!(validate_session(&s.session).is_empty());
    }

    #[test]
    fn notes_recovered_from_envelope() {
        let s = small(None, 22, 5);
        let notes = session_notes(&s.session.audio, &AudioConfig::default()).unwrap();
        assert_eq!(notes.len(), 22);
        for (got, want) in notes.iter().zip(&s.notes) {
            assert_eq!((got.note_id, got.start, got.end), (want.note_id, want.start, want.end));
        }
    }

    #[test]
    fn target_counts_by_type() {
        for n in &small(None, 30, 8).notes {
            match n.note_type {
                NoteType::Summary => assert!(n.targets.len() >= 2),
                _ => assert_eq!(n.targets.len(), 1),
            }
        }
    }

    #[test]
    fn tiny_layout_rejected() {
        let layout = PageLayout {
            pages: alloc::vec![Page {
                page: 1,
                w: PAGE_W,
                h: PAGE_H,
                passages: alloc::vec![Passage { id: 0, page: 1, x: 80.0, y: 80.0, w: 400.0, h: 56.0 }],
            }],
        };
        let r = simulate_participant("P01", &layout, &BehaviorProfile::default(), 3, 1);
        assert!(matches!(r, Err(Error::LayoutTooSmall(_))));
    }

    #[test]
    fn bad_profile_rejected() {
        let mut p = BehaviorProfile::default();
        p.mix = [0.5, 0.5, 0.5];
        assert!(matches!(p.validate(), Err(Error::Config(_))));
        let mut p = BehaviorProfile::default();
        p.short.adherence = 1.5;
        assert!(matches!(p.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn seeds_differ() {
        assert_ne!(participant_seed(1, 0), participant_seed(1, 1));
        assert_ne!(participant_seed(1, 0), participant_seed(2, 0));
    }
}
