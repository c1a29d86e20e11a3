//! Classification metrics.

use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Precision, recall and F1 of the positive class. Any zero denominator
/// yields 0 for that metric.
pub fn precision_recall_f1(predicted: &[bool], truth: &[bool]) -> Result<Prf> {
    if predicted.len() != truth.len() {
        return Err(Error::LengthMismatch(predicted.len(), truth.len()));
    }
    let (mut tp, mut fp, mut fneg) = (0usize, 0usize, 0usize);
    for (&p, &t) in predicted.iter().zip(truth) {
        match (p, t) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fneg += 1,
            (false, false) => {}
        }
    }
    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fneg);
    let f1 = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
    Ok(Prf { precision, recall, f1 })
}

/// Area under the ROC curve via the Mann-Whitney rank-sum statistic, with
/// tied scores sharing their average rank (each tied pair counts one half).
pub fn roc_auc(scores: &[f64], truth: &[bool]) -> Result<f64> {
    if scores.len() != truth.len() {
        return Err(Error::LengthMismatch(scores.len(), truth.len()));
    }
    let n_pos = truth.iter().filter(|&&t| t).count();
    let n_neg = truth.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // ranks are 1-based; doubled so tied groups stay integral
    let mut pos_rank_sum2: u128 = 0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let avg_rank2 = (i + 1 + j + 1) as u128;
        let positives = order[i..=j].iter().filter(|&&k| truth[k]).count() as u128;
        pos_rank_sum2 += avg_rank2 * positives;
        i = j + 1;
    }
    let min_sum2 = (n_pos * (n_pos + 1)) as u128;
    let u2 = pos_rank_sum2 - min_sum2;
    Ok(u2 as f64 / (2.0 * n_pos as f64 * n_neg as f64))
}
