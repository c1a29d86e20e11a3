//! Anchoring timestamped voice notes to document passages from gaze traces.
//!
//! The crate is `no_std` (with `alloc`) and holds every algorithmic stage:
//! voice-note extraction from an audio envelope, scroll replay and passage
//! geometry, dispersion-threshold fixation detection, per-passage features,
//! a bagged decision-tree ensemble, the two heuristic baselines, evaluation
//! protocols and a seeded reading-session simulator. File formats, the model
//! file on disk and the command-line tool live in the `voxanchor` crate.

#![no_std]

extern crate alloc;

pub mod audio;
pub mod baselines;
pub mod error;
pub mod eval;
pub mod features;
pub mod forest;
pub mod gaze;
pub mod layout;
pub mod metrics;
pub mod pipeline;
pub mod session;
pub mod sim;
pub mod types;

pub use error::{Error, Result};
pub use types::*;
