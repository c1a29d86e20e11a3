//! Bagged decision-tree ensemble for the annotated / not-annotated decision.
//!
//! Each tree is grown on a bootstrap resample with Gini splits over a random
//! subset of features per node. Tree `i` draws from its own ChaCha stream
//! (master seed, stream `i`), so trees can be grown in any order or in
//! parallel and the forest is still bit-identical.

mod codec;
mod tree;

pub use codec::{decode_forest, encode_forest, FORMAT_VERSION};
pub use tree::{DecisionTree, Node};

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::features::{PassageFeatureVector, FEATURE_NAMES, N_FEATURES};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum ClassWeighting {
    /// Weights inversely proportional to class frequency in each resample.
    Balanced,
    None,
}

impl fmt::Display for ClassWeighting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassWeighting::Balanced => "balanced",
            ClassWeighting::None => "none",
        })
    }
}

impl FromStr for ClassWeighting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "balanced" => Ok(ClassWeighting::Balanced),
            "none" => Ok(ClassWeighting::None),
            other => Err(Error::Config(alloc::format!("unknown class weighting {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub features_per_split: usize,
    pub bootstrap: bool,
    pub class_weighting: ClassWeighting,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 1000,
            max_depth: None,
            min_samples_leaf: 1,
            // ceil(sqrt(15))
            features_per_split: 4,
            bootstrap: true,
            class_weighting: ClassWeighting::Balanced,
            seed: 0,
        }
    }
}

impl ForestConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::Config("n_trees must be at least 1".into()));
        }
        if !(1..=N_FEATURES).contains(&self.features_per_split) {
            return Err(Error::Config(alloc::format!("features_per_split must lie in [1, {N_FEATURES}]")));
        }
        if self.min_samples_leaf == 0 {
            return Err(Error::Config("min_samples_leaf must be at least 1".into()));
        }
        Ok(())
    }
}

/// One grown tree with its raw per-feature impurity decreases.
#[derive(Debug, Clone)]
pub struct FittedTree {
    pub tree: DecisionTree,
    pub impurity_decrease: [f64; N_FEATURES],
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedForest {
    config: ForestConfig,
    trees: Vec<DecisionTree>,
    importances: [f64; N_FEATURES],
}

/// Fails unless both classes are present.
pub fn check_training_labels(y: &[bool]) -> Result<()> {
    if y.is_empty() {
        return Err(Error::EmptyData);
    }
    if y.iter().all(|&v| v) || y.iter().all(|&v| !v) {
        return Err(Error::SingleClassData);
    }
    Ok(())
}

/// Splits labeled feature vectors into a design matrix and targets.
pub fn design_matrix(rows: &[PassageFeatureVector]) -> Result<(Vec<[f64; N_FEATURES]>, Vec<bool>)> {
    let mut x = Vec::with_capacity(rows.len());
    let mut y = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        x.push(row.features);
        y.push(row.label.as_bool().ok_or(Error::UnlabeledRow(i))?);
    }
    Ok((x, y))
}

/// Grows tree number `index` of a forest.
pub fn train_tree(x: &[[f64; N_FEATURES]], y: &[bool], cfg: &ForestConfig, index: u64) -> FittedTree {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index);
    let n = x.len();
    let rows: Vec<usize> = if cfg.bootstrap {
        (0..n).map(|_| rng.random_range(0..n)).collect()
    } else {
        (0..n).collect()
    };
    let class_weight = match cfg.class_weighting {
        ClassWeighting::None => [1.0, 1.0],
        ClassWeighting::Balanced => {
            let positives = rows.iter().filter(|&&r| y[r]).count();
            let counts = [rows.len() - positives, positives];
            let total = rows.len() as f64;
            core::array::from_fn(|c| if counts[c] > 0 { total / (2.0 * counts[c] as f64) } else { 1.0 })
        }
    };
    let params = tree::GrowParams {
        max_depth: cfg.max_depth,
        min_samples_leaf: cfg.min_samples_leaf,
        features_per_split: cfg.features_per_split,
    };
    let (tree, impurity_decrease) = tree::grow(x, y, rows, class_weight, &params, &mut rng);
    FittedTree { tree, impurity_decrease }
}

/// Trains a forest sequentially; see [`assemble_forest`] for parallel use.
pub fn train_forest_xy(x: &[[f64; N_FEATURES]], y: &[bool], cfg: &ForestConfig) -> Result<TrainedForest> {
    cfg.validate()?;
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    check_training_labels(y)?;
    let fitted = (0..cfg.n_trees as u64).map(|i| train_tree(x, y, cfg, i)).collect();
    Ok(assemble_forest(*cfg, fitted))
}

pub fn train_forest(rows: &[PassageFeatureVector], cfg: &ForestConfig) -> Result<TrainedForest> {
    let (x, y) = design_matrix(rows)?;
    train_forest_xy(&x, &y, cfg)
}

/// Combines fitted trees, given in index order, into a forest.
///
/// Importances are normalized per tree, averaged, and renormalized to sum to
/// one; a forest with no splits at all reports uniform importances.
pub fn assemble_forest(config: ForestConfig, fitted: Vec<FittedTree>) -> TrainedForest {
    let mut importances = [0.0; N_FEATURES];
    let mut trees = Vec::with_capacity(fitted.len());
    for f in fitted {
        let total: f64 = f.impurity_decrease.iter().sum();
        if total > 0.0 {
            for (acc, v) in importances.iter_mut().zip(f.impurity_decrease) {
                *acc += v / total;
            }
        }
        trees.push(f.tree);
    }
    TrainedForest { config, trees, importances: normalize_importances(importances) }
}

fn normalize_importances(raw: [f64; N_FEATURES]) -> [f64; N_FEATURES] {
    let total: f64 = raw.iter().sum();
    if total > 0.0 {
        raw.map(|v| v / total)
    } else {
        [1.0 / N_FEATURES as f64; N_FEATURES]
    }
}

impl TrainedForest {
    pub(crate) fn from_parts(
        config: ForestConfig,
        trees: Vec<DecisionTree>,
        importances: [f64; N_FEATURES],
    ) -> Self {
        TrainedForest { config, trees, importances }
    }

    pub fn config(&self) -> &ForestConfig {
        &self.config
    }

    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }

    /// Normalized importances in feature order.
    pub fn importances(&self) -> &[f64; N_FEATURES] {
        &self.importances
    }

    /// Probability of the annotated class: the mean over trees of the
    /// annotated weight fraction in the leaf reached.
    pub fn predict_proba(&self, x: &[f64; N_FEATURES]) -> f64 {
        let sum: f64 = self.trees.iter().map(|t| t.proba(x)).sum();
        (sum / self.trees.len() as f64).clamp(0.0, 1.0)
    }

    pub fn predict(&self, x: &[f64; N_FEATURES]) -> bool {
        self.predict_proba(x) >= DECISION_THRESHOLD
    }

    /// Importances paired with feature names, largest first (ties in feature
    /// order).
    pub fn feature_importance(&self) -> Vec<(&'static str, f64)> {
        let mut named: Vec<(usize, f64)> = self.importances.iter().copied().enumerate().collect();
        named.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        named.into_iter().map(|(i, v)| (FEATURE_NAMES[i], v)).collect()
    }
}

/// Probability at or above which a passage is labeled annotated.
pub const DECISION_THRESHOLD: f64 = 0.5;

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn row(values: &[f64]) -> [f64; N_FEATURES] {
        let mut r = [0.0; N_FEATURES];
        r[..values.len()].copy_from_slice(values);
        r
    }

    fn single_tree() -> ForestConfig {
        ForestConfig { n_trees: 1, bootstrap: false, features_per_split: N_FEATURES, seed: 3, ..Default::default() }
    }

    #[test]
    fn unbagged_tree_memorizes() {
        // xor-like pattern over two features plus a decoy
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..40 {
            let a = (i % 4) as f64;
            let b = (i / 4 % 5) as f64;
            x.push(row(&[a, b, (i * 7 % 11) as f64]));
            y.push(((a as i32) + (b as i32)) % 2 == 0);
        }
        let forest = train_forest_xy(&x, &y, &single_tree()).unwrap();
        assert!(x.iter().zip(&y).all(|(r, &l)| forest.predict(r) == l));
        assert!(x.iter().all(|r| {
            let p = forest.predict_proba(r);
            p == 0.0 || p == 1.0
        }));
    }

    #[test]
    fn single_split_importance() {
        let x: Vec<_> = (0..10)
            .map(|i| {
                let mut r = [0.0; N_FEATURES];
                r[14] = i as f64;
                r
            })
            .collect();
        let y: Vec<bool> = (0..10).map(|i| i >= 5).collect();
        let forest = train_forest_xy(&x, &y, &single_tree()).unwrap();
        assert_eq!(forest.trees()[0].nodes().len(), 3);
        let imp = forest.feature_importance();
        assert_eq!(imp[0], ("temporal_order", 1.0));
        assert!(imp[1..].iter().all(|(_, v)| *v == 0.0));
        match forest.trees()[0].nodes()[0] {
            Node::Split { feature, threshold, .. } => assert_eq!((feature, threshold), (14, 4.5)),
            _ => panic!("expected split"),
        }
    }

    #[test]
    fn three_tree_vote_average() {
        let leaf = |c: f64| DecisionTree::from_nodes(vec![Node::Leaf { weights: [1.0 - c, c] }]).unwrap();
        let forest = TrainedForest::from_parts(ForestConfig::default(), vec![leaf(1.0), leaf(0.0), leaf(1.0)], [0.0; 15]);
        assert!((forest.predict_proba(&[0.0; 15]) - 2.0 / 3.0).abs() < 1e-15);
        let zero = TrainedForest::from_parts(ForestConfig::default(), vec![leaf(0.0); 2], [0.0; 15]);
        assert_eq!(zero.predict_proba(&[0.0; 15]), 0.0);
    }

    #[test]
    fn single_class_rejected() {
        let x = vec![row(&[1.0]); 4];
        assert_eq!(train_forest_xy(&x, &[true; 4], &single_tree()), Err(Error::SingleClassData));
        assert_eq!(train_forest_xy(&[], &[], &single_tree()), Err(Error::EmptyData));
    }

    #[test]
    fn depth_limit_respected() {
        let x: Vec<_> = (0..64).map(|i| row(&[i as f64, (i * 13 % 64) as f64])).collect();
        let y: Vec<bool> = (0..64).map(|i| (i * 13 % 64) % 3 == 0).collect();
        let cfg = ForestConfig { max_depth: Some(2), ..single_tree() };
        let forest = train_forest_xy(&x, &y, &cfg).unwrap();
        assert!(forest.trees()[0].depth() <= 2);
    }

    #[test]
    fn min_samples_leaf_respected() {
        let x: Vec<_> = (0..30).map(|i| row(&[i as f64])).collect();
        let y: Vec<bool> = (0..30).map(|i| i % 2 == 0).collect();
        let cfg = ForestConfig { min_samples_leaf: 5, ..single_tree() };
        let forest = train_forest_xy(&x, &y, &cfg).unwrap();
        for (i, node) in forest.trees()[0].nodes().iter().enumerate() {
            if let Node::Leaf { weights } = node {
                // balanced weights are 1.0 for a 15/15 split
                assert!(weights[0] + weights[1] >= 5.0, "leaf {i} too small");
            }
        }
    }

    #[test]
    fn invalid_configs() {
        let x = vec![row(&[0.0]), row(&[1.0])];
        let y = [false, true];
        for cfg in [
            ForestConfig { n_trees: 0, ..Default::default() },
            ForestConfig { features_per_split: 0, ..Default::default() },
            ForestConfig { features_per_split: 16, ..Default::default() },
        ] {
            assert!(matches!(train_forest_xy(&x, &y, &cfg), Err(Error::Config(_))));
        }
    }
}
