//! Versioned plain-text model format.
//!
//! ```text
//! voxanchor-forest 1
//! config n_trees=200 max_depth=none min_samples_leaf=1 features_per_split=4 bootstrap=true class_weighting=balanced seed=1
//! features norm_fixation_count ... temporal_order
//! importances <15 values>
//! tree <node count>
//! s <feature> <threshold> <left> <right>
//! l <weight not annotated> <weight annotated>
//! ...
//! end
//! ```
//!
//! Floats use Rust's shortest round-trip formatting, so decoding reproduces
//! every threshold and leaf weight bit for bit.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;
use core::str::FromStr;

use super::{ClassWeighting, DecisionTree, ForestConfig, Node, TrainedForest};
use crate::error::{Error, Result};
use crate::features::{FEATURE_NAMES, N_FEATURES};

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "voxanchor-forest";

pub fn encode_forest(model: &TrainedForest) -> String {
    let mut out = String::new();
    let c = model.config();
    let depth = c.max_depth.map_or_else(|| String::from("none"), |d| format!("{d}"));
    // writing into a String cannot fail
    let _ = writeln!(out, "{MAGIC} {FORMAT_VERSION}");
    let _ = writeln!(
        out,
        "config n_trees={} max_depth={} min_samples_leaf={} features_per_split={} bootstrap={} class_weighting={} seed={}",
        c.n_trees, depth, c.min_samples_leaf, c.features_per_split, c.bootstrap, c.class_weighting, c.seed
    );
    let _ = writeln!(out, "features {}", FEATURE_NAMES.join(" "));
    out.push_str("importances");
    for v in model.importances() {
        let _ = write!(out, " {v}");
    }
    out.push('\n');
    for tree in model.trees() {
        let _ = writeln!(out, "tree {}", tree.nodes().len());
        for node in tree.nodes() {
            let _ = match node {
                Node::Split { feature, threshold, left, right } => {
                    writeln!(out, "s {feature} {threshold} {left} {right}")
                }
                Node::Leaf { weights } => writeln!(out, "l {} {}", weights[0], weights[1]),
            };
        }
    }
    out.push_str("end\n");
    out
}

fn corrupt(msg: impl Into<String>) -> Error {
    Error::CorruptModel(msg.into())
}

fn parse<T: FromStr>(token: Option<&str>, what: &str) -> Result<T> {
    token.and_then(|t| t.parse().ok()).ok_or_else(|| corrupt(format!("bad {what}")))
}

fn parse_config(line: &str) -> Result<ForestConfig> {
    let mut tokens = line.split_whitespace();
    if tokens.next() != Some("config") {
        return Err(corrupt("missing config line"));
    }
    let mut cfg = ForestConfig::default();
    let mut seen = 0;
    for tok in tokens {
        let (key, value) = tok.split_once('=').ok_or_else(|| corrupt(format!("bad config entry {tok}")))?;
        match key {
            "n_trees" => cfg.n_trees = parse(Some(value), key)?,
            "max_depth" => cfg.max_depth = if value == "none" { None } else { Some(parse(Some(value), key)?) },
            "min_samples_leaf" => cfg.min_samples_leaf = parse(Some(value), key)?,
            "features_per_split" => cfg.features_per_split = parse(Some(value), key)?,
            "bootstrap" => cfg.bootstrap = parse(Some(value), key)?,
            "class_weighting" => {
                cfg.class_weighting = ClassWeighting::from_str(value).map_err(|_| corrupt("bad class_weighting"))?
            }
            "seed" => cfg.seed = parse(Some(value), key)?,
            _ => return Err(corrupt(format!("unknown config key {key}"))),
        }
        seen += 1;
    }
    if seen != 7 {
        return Err(corrupt("incomplete config line"));
    }
    cfg.validate().map_err(|e| corrupt(format!("{e}")))?;
    Ok(cfg)
}

pub fn decode_forest(text: &str) -> Result<TrainedForest> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| corrupt("empty model file"))?;
    let mut head = header.split_whitespace();
    if head.next() != Some(MAGIC) {
        return Err(corrupt("not a forest model file"));
    }
    let version = head.next().unwrap_or("");
    if version != format!("{FORMAT_VERSION}") {
        return Err(Error::VersionMismatch { expected: FORMAT_VERSION, found: version.into() });
    }

    let config = parse_config(lines.next().ok_or_else(|| corrupt("missing config line"))?)?;

    let features = lines.next().ok_or_else(|| corrupt("missing feature names"))?;
    let names: Vec<&str> = features.split_whitespace().collect();
    if names.first() != Some(&"features") || names[1..] != FEATURE_NAMES {
        return Err(corrupt("feature names do not match"));
    }

    let imp_line = lines.next().ok_or_else(|| corrupt("missing importances"))?;
    let mut imp_tokens = imp_line.split_whitespace();
    if imp_tokens.next() != Some("importances") {
        return Err(corrupt("missing importances"));
    }
    let mut importances = [0.0; N_FEATURES];
    for slot in importances.iter_mut() {
        *slot = parse(imp_tokens.next(), "importance")?;
    }
    if imp_tokens.next().is_some() {
        return Err(corrupt("too many importances"));
    }

    let mut trees = Vec::with_capacity(config.n_trees);
    for _ in 0..config.n_trees {
        let line = lines.next().ok_or_else(|| corrupt("truncated: missing tree"))?;
        let mut t = line.split_whitespace();
        if t.next() != Some("tree") {
            return Err(corrupt("expected tree header"));
        }
        let count: usize = parse(t.next(), "node count")?;
        let mut nodes = Vec::with_capacity(count);
        for _ in 0..count {
            let line = lines.next().ok_or_else(|| corrupt("truncated: missing node"))?;
            let mut tok = line.split_whitespace();
            let node = match tok.next() {
                Some("s") => Node::Split {
                    feature: parse(tok.next(), "split feature")?,
                    threshold: parse(tok.next(), "split threshold")?,
                    left: parse(tok.next(), "left child")?,
                    right: parse(tok.next(), "right child")?,
                },
                Some("l") => Node::Leaf { weights: [parse(tok.next(), "leaf weight")?, parse(tok.next(), "leaf weight")?] },
                _ => return Err(corrupt("bad node line")),
            };
            if tok.next().is_some() {
                return Err(corrupt("trailing tokens on node line"));
            }
            nodes.push(node);
        }
        trees.push(DecisionTree::from_nodes(nodes)?);
    }
    if lines.next() != Some("end") {
        return Err(corrupt("truncated: missing end marker"));
    }
    Ok(TrainedForest::from_parts(config, trees, importances))
}
