//! File formats, parallel drivers and the `voxanchor` command line on top of
//! `voxanchor-core`.

pub mod cli;
pub mod config;
pub mod engine;
pub mod error;
pub mod formats;
pub mod pbm;
pub mod render;
pub mod session_io;
pub mod tables;

pub use error::{Error, Result};
