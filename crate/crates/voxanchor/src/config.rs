//! The shared run configuration.
//!
//! A flat TOML file of `key = value` lines. Every key is optional; absent keys
//! take the defaults below and unknown keys are rejected. Command-line flags
//! override the file.
//!
//! ```toml
//! # audio
//! threshold_db_rel = 26.0
//! min_note_ms = 3000
//! merge_gap_ms = 400
//! frame_ms = 10
//! # fixations
//! idt_dispersion_px = 25.0
//! idt_duration_ms = 100
//! baseline_idt_dispersion_px = 20.0
//! baseline_idt_duration_ms = 100
//! # forest
//! n_trees = 1000
//! # max_depth = 12          (unset: grow until pure)
//! min_samples_leaf = 1
//! features_per_split = 4
//! bootstrap = true
//! class_weighting = "balanced"  # or "none"
//! seed = 0
//! # evaluation
//! cv = "lopo"                   # or "loo"
//! # simulator
//! participants = 32
//! notes_per_participant = 22
//! documents = 4
//! ```

use std::path::Path;

use serde::Deserialize;
use voxanchor_core::audio::AudioConfig;
use voxanchor_core::eval::Protocol;
use voxanchor_core::forest::{ClassWeighting, ForestConfig};
use voxanchor_core::gaze::IdtConfig;
use voxanchor_core::pipeline::PipelineConfig;

use crate::error::{Error, Result};
use crate::formats::read_text;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub threshold_db_rel: f64,
    pub min_note_ms: i64,
    pub merge_gap_ms: i64,
    pub frame_ms: i64,
    pub idt_dispersion_px: f64,
    pub idt_duration_ms: i64,
    pub baseline_idt_dispersion_px: f64,
    pub baseline_idt_duration_ms: i64,
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub features_per_split: usize,
    pub bootstrap: bool,
    pub class_weighting: String,
    pub seed: u64,
    pub cv: String,
    pub participants: usize,
    pub notes_per_participant: usize,
    pub documents: usize,
}

impl Default for Config {
    fn default() -> Self {
        let audio = AudioConfig::default();
        let forest = ForestConfig::default();
        Config {
            threshold_db_rel: audio.threshold_db_rel,
            min_note_ms: audio.min_note_ms,
            merge_gap_ms: audio.merge_gap_ms,
            frame_ms: audio.frame_ms,
            idt_dispersion_px: IdtConfig::PIPELINE.dispersion_threshold,
            idt_duration_ms: IdtConfig::PIPELINE.duration_threshold,
            baseline_idt_dispersion_px: IdtConfig::BASELINE.dispersion_threshold,
            baseline_idt_duration_ms: IdtConfig::BASELINE.duration_threshold,
            n_trees: forest.n_trees,
            max_depth: forest.max_depth,
            min_samples_leaf: forest.min_samples_leaf,
            features_per_split: forest.features_per_split,
            bootstrap: forest.bootstrap,
            class_weighting: forest.class_weighting.to_string(),
            seed: forest.seed,
            cv: "lopo".into(),
            participants: 32,
            notes_per_participant: 22,
            documents: 4,
        }
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Config> {
        let cfg: Config = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    /// Defaults when `path` is `None`.
    pub fn load(path: Option<&Path>) -> Result<Config> {
        match path {
            None => Ok(Config::default()),
            Some(p) => Config::parse(&read_text(p)?).map_err(|e| match e {
                Error::Config(msg) => Error::Config(format!("{}: {msg}", p.display())),
                other => other,
            }),
        }
    }

    pub fn check(&self) -> Result<()> {
        self.forest()?.validate()?;
        self.protocol()?;
        let positive = [
            ("frame_ms", self.frame_ms),
            ("min_note_ms", self.min_note_ms),
            ("idt_duration_ms", self.idt_duration_ms),
            ("baseline_idt_duration_ms", self.baseline_idt_duration_ms),
        ];
        for (name, v) in positive {
            if v <= 0 {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        if self.merge_gap_ms < 0 {
            return Err(Error::Config("merge_gap_ms must not be negative".into()));
        }
        for (name, v) in [
            ("threshold_db_rel", self.threshold_db_rel),
            ("idt_dispersion_px", self.idt_dispersion_px),
            ("baseline_idt_dispersion_px", self.baseline_idt_dispersion_px),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        Ok(())
    }

    pub fn pipeline(&self) -> PipelineConfig {
        PipelineConfig {
            audio: AudioConfig {
                threshold_db_rel: self.threshold_db_rel,
                min_note_ms: self.min_note_ms,
                merge_gap_ms: self.merge_gap_ms,
                frame_ms: self.frame_ms,
            },
            idt: IdtConfig { dispersion_threshold: self.idt_dispersion_px, duration_threshold: self.idt_duration_ms },
            baseline_idt: IdtConfig {
                dispersion_threshold: self.baseline_idt_dispersion_px,
                duration_threshold: self.baseline_idt_duration_ms,
            },
        }
    }

    pub fn forest(&self) -> Result<ForestConfig> {
        let class_weighting: ClassWeighting = self.class_weighting.parse().map_err(|e: voxanchor_core::Error| Error::Config(e.to_string()))?;
        let cfg = ForestConfig {
            n_trees: self.n_trees,
            max_depth: self.max_depth,
            min_samples_leaf: self.min_samples_leaf,
            features_per_split: self.features_per_split,
            bootstrap: self.bootstrap,
            class_weighting,
            seed: self.seed,
        };
        cfg.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn protocol(&self) -> Result<Protocol> {
        parse_protocol(&self.cv)
    }
}

pub fn parse_protocol(s: &str) -> Result<Protocol> {
    match s {
        "lopo" => Ok(Protocol::LeaveOneParticipantOut),
        "loo" => Ok(Protocol::LeaveOneNoteOut),
        other => Err(Error::Config(format!("unknown cv protocol {other:?}; expected lopo or loo"))),
    }
}
