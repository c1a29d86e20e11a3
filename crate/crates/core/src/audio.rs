//! Voice-note extraction from an audio level envelope.
//!
//! Levels are thresholded relative to the session noise floor (the 5th
//! percentile of envelope values). Above-threshold runs separated by short
//! pauses are merged, and runs shorter than the minimum note length dropped.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::types::{EnvelopePoint, Millis};

/// Level assigned to frames with no energy.
pub const SILENCE_FLOOR_DB: f64 = -120.0;
/// Percentile of envelope levels taken as the noise floor.
pub const NOISE_FLOOR_PERCENTILE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AudioConfig {
    /// Threshold in dB above the noise floor.
    pub threshold_db_rel: f64,
    pub min_note_ms: Millis,
    pub merge_gap_ms: Millis,
    pub frame_ms: Millis,
}

impl Default for AudioConfig {
    fn default() -> Self {
        AudioConfig { threshold_db_rel: 26.0, min_note_ms: 3000, merge_gap_ms: 400, frame_ms: 10 }
    }
}

/// An utterance interval `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VoiceNote {
    pub note_id: u32,
    pub start: Millis,
    pub end: Millis,
}

impl VoiceNote {
    pub fn duration(&self) -> Millis {
        self.end - self.start
    }
}

/// Analysis window of a note: from the end of the previous note to the end
/// of this one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegionOfAnalysis {
    pub note_id: u32,
    pub roa_start: Millis,
    pub roa_end: Millis,
}

impl RegionOfAnalysis {
    pub fn contains(&self, t: Millis) -> bool {
        t >= self.roa_start && t <= self.roa_end
    }
}

/// Converts 16-bit PCM to amplitudes in `[-1, 1)`.
pub fn pcm16_to_unit(samples: &[i16]) -> Vec<f64> {
    samples.iter().map(|&s| f64::from(s) / 32768.0).collect()
}

/// RMS level per non-overlapping frame, in dB relative to full scale (1.0).
///
/// A trailing partial frame gets its own point.
pub fn compute_envelope(samples: &[f64], sample_rate: u32, frame_ms: Millis) -> Result<Vec<EnvelopePoint>> {
    if samples.is_empty() {
        return Err(Error::EmptyAudio);
    }
    if frame_ms <= 0 || sample_rate == 0 {
        return Err(Error::Config("frame_ms and sample_rate must be positive".into()));
    }
    let frame_len = ((u64::from(sample_rate) * frame_ms as u64) / 1000).max(1) as usize;
    Ok(samples
        .chunks(frame_len)
        .enumerate()
        .map(|(i, frame)| EnvelopePoint { t: i as Millis * frame_ms, db: rms_db(frame) })
        .collect())
}

fn rms_db(frame: &[f64]) -> f64 {
    let mean_sq = frame.iter().map(|s| s * s).sum::<f64>() / frame.len() as f64;
    let rms = libm::sqrt(mean_sq);
    if rms <= 0.0 {
        return SILENCE_FLOOR_DB;
    }
    (20.0 * libm::log10(rms)).max(SILENCE_FLOOR_DB)
}

/// Nearest-rank percentile of the envelope levels.
pub fn noise_floor(env: &[EnvelopePoint]) -> Option<f64> {
    if env.is_empty() {
        return None;
    }
    let mut levels: Vec<f64> = env.iter().map(|p| p.db).collect();
    levels.sort_by(f64::total_cmp);
    let rank = libm::ceil(NOISE_FLOOR_PERCENTILE * levels.len() as f64) as usize;
    Some(levels[rank.saturating_sub(1)])
}

pub fn extract_voice_notes(env: &[EnvelopePoint], cfg: &AudioConfig) -> Vec<VoiceNote> {
    let Some(floor) = noise_floor(env) else { return Vec::new() };
    let threshold = floor + cfg.threshold_db_rel;
    let frame_end = |i: usize| env.get(i + 1).map_or(env[i].t + cfg.frame_ms, |p| p.t);

    let mut runs: Vec<(Millis, Millis)> = Vec::new();
    let mut i = 0;
    while i < env.len() {
        if env[i].db < threshold {
            i += 1;
            continue;
        }
        let start = env[i].t;
        while i + 1 < env.len() && env[i + 1].db >= threshold {
            i += 1;
        }
        let end = frame_end(i);
        match runs.last_mut() {
            Some(last) if start - last.1 < cfg.merge_gap_ms => last.1 = end,
            _ => runs.push((start, end)),
        }
        i += 1;
    }

    runs.into_iter()
        .filter(|(s, e)| e - s >= cfg.min_note_ms)
        .zip(0u32..)
        .map(|((start, end), note_id)| VoiceNote { note_id, start, end })
        .collect()
}

pub fn compute_roas(notes: &[VoiceNote], session_start: Millis) -> Vec<RegionOfAnalysis> {
    let mut prev_end = session_start;
    notes
        .iter()
        .map(|n| {
            let roa = RegionOfAnalysis { note_id: n.note_id, roa_start: prev_end, roa_end: n.end };
            prev_end = n.end;
            roa
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn cfg() -> AudioConfig {
        AudioConfig::default()
    }

    /// Envelope of 10 ms frames: silence at -70 dB, speech at -20 dB.
    fn envelope(total_ms: Millis, speech: &[(Millis, Millis)]) -> Vec<EnvelopePoint> {
        (0..total_ms / 10)
            .map(|i| {
                let t = i * 10;
                let loud = speech.iter().any(|&(s, e)| t >= s && t < e);
                EnvelopePoint { t, db: if loud { -20.0 } else { -70.0 } }
            })
            .collect()
    }

    /// Reference linear scan: merge, then keep long runs.
    fn scan_notes(env: &[EnvelopePoint], threshold: f64, c: &AudioConfig) -> Vec<(Millis, Millis)> {
        let mut above: Vec<(Millis, Millis)> = Vec::new();
        for p in env {
            if p.db >= threshold {
                if let Some(last) = above.last_mut() {
                    if last.1 == p.t {
                        last.1 = p.t + 10;
                        continue;
                    }
                }
                above.push((p.t, p.t + 10));
            }
        }
        let mut merged: Vec<(Millis, Millis)> = Vec::new();
        for r in above {
            if let Some(last) = merged.last_mut() {
                if r.0 - last.1 < c.merge_gap_ms {
                    last.1 = r.1;
                    continue;
                }
            }
            merged.push(r);
        }
        merged.retain(|r| r.1 - r.0 >= c.min_note_ms);
        merged
    }

    #[test]
    fn silent_frame_hits_floor() {
        let env = compute_envelope(&[0.0; 160], 16_000, 10).unwrap();
        assert_eq!(env, vec![EnvelopePoint { t: 0, db: SILENCE_FLOOR_DB }]);
    }

    #[test]
    fn full_scale_square_is_zero_db() {
        let sq: Vec<f64> = (0..160).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let env = compute_envelope(&sq, 16_000, 10).unwrap();
        assert!(env[0].db.abs() < 1e-12);
    }

    #[test]
    fn half_scale_sine_level() {
        // 16 samples per period, 10 periods per 160-sample frame
        let sine: Vec<f64> = (0..160)
            .map(|i| 0.5 * libm::sin(2.0 * core::f64::consts::PI * i as f64 / 16.0))
            .collect();
        let env = compute_envelope(&sine, 16_000, 10).unwrap();
        let expected = 20.0 * libm::log10(0.5 / core::f64::consts::SQRT_2);
        assert!((env[0].db - expected).abs() < 1e-9);
        assert!((env[0].db + 9.0309).abs() < 1e-3);
    }

    #[test]
    fn empty_audio_rejected() {
        assert_eq!(compute_envelope(&[], 16_000, 10), Err(Error::EmptyAudio));
    }

    #[test]
    fn all_below_threshold_is_empty() {
        assert!(extract_voice_notes(&envelope(20_000, &[]), &cfg()).is_empty());
    }

    #[test]
    fn short_run_discarded() {
        assert!(extract_voice_notes(&envelope(20_000, &[(5_000, 7_500)]), &cfg()).is_empty());
    }

    #[test]
    fn two_runs_separated_by_silence() {
        let speech = [(2_000, 6_000), (7_500, 12_500)];
        let env = envelope(20_000, &speech);
        let notes = extract_voice_notes(&env, &cfg());
        let floor = noise_floor(&env).unwrap();
        let oracle = scan_notes(&env, floor + 26.0, &cfg());
        assert_eq!(oracle, speech.to_vec());
        let got: Vec<_> = notes.iter().map(|n| (n.start, n.end)).collect();
        assert_eq!(got, oracle);
        assert_eq!(notes[1].note_id, 1);
    }

    #[test]
    fn word_pauses_are_merged() {
        let env = envelope(20_000, &[(2_000, 3_500), (3_800, 6_000)]);
        let notes = extract_voice_notes(&env, &cfg());
        assert_eq!(notes, vec![VoiceNote { note_id: 0, start: 2_000, end: 6_000 }]);
    }

    #[test]
    fn roa_boundaries() {
        let one = [VoiceNote { note_id: 0, start: 4_000, end: 9_000 }];
        assert_eq!(compute_roas(&one, 0), vec![RegionOfAnalysis { note_id: 0, roa_start: 0, roa_end: 9_000 }]);
        let two = [
            VoiceNote { note_id: 0, start: 5_000, end: 10_000 },
            VoiceNote { note_id: 1, start: 20_000, end: 25_000 },
        ];
        assert_eq!(compute_roas(&two, 0)[1], RegionOfAnalysis { note_id: 1, roa_start: 10_000, roa_end: 25_000 });
        assert!(compute_roas(&[], 0).is_empty());
    }

    #[test]
    fn binary_envelope_is_a_fixed_point() {
        let env = envelope(60_000, &[(1_000, 5_000), (9_000, 13_000), (20_000, 40_000)]);
        let notes = extract_voice_notes(&env, &cfg());
        let binary: Vec<EnvelopePoint> = env
            .iter()
            .map(|p| {
                let on = notes.iter().any(|n| p.t >= n.start && p.t < n.end);
                EnvelopePoint { t: p.t, db: if on { 0.0 } else { SILENCE_FLOOR_DB } }
            })
            .collect();
        assert_eq!(extract_voice_notes(&binary, &cfg()), notes);
    }
}
