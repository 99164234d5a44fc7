//! ROC analysis, AUC, and threshold metrics. Positive means defective.

use alloc::vec::Vec;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub threshold: f64,
    pub tpr: f64,
    pub fpr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

fn class_counts(scores: &[f64], labels: &[bool]) -> Result<(usize, usize)> {
    if scores.len() != labels.len() {
        return Err(Error::LengthMismatch { left: scores.len(), right: labels.len() });
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::NonFinite);
    }
    let pos = labels.iter().filter(|&&l| l).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::SingleClass);
    }
    Ok((pos, neg))
}

/// Candidate thresholds with their integer counts, in descending threshold
/// order: one above the maximum score, the midpoints between adjacent
/// distinct scores, and one below the minimum.
fn threshold_counts(scores: &[f64], labels: &[bool]) -> Vec<(f64, usize, usize)> {
    let mut pairs: Vec<(f64, bool)> = scores.iter().copied().zip(labels.iter().copied()).collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));

    let max = pairs[0].0;
    let min = pairs[pairs.len() - 1].0;
    let mut out = Vec::with_capacity(pairs.len() + 2);
    out.push((max + 1.0, 0, 0));

    let (mut tp, mut fp) = (0, 0);
    let mut i = 0;
    while i < pairs.len() {
        let s = pairs[i].0;
        while i < pairs.len() && pairs[i].0 == s {
            if pairs[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        // Everything scored >= s is now counted positive.
        let threshold = if i < pairs.len() { 0.5 * (s + pairs[i].0) } else { min - 1.0 };
        out.push((threshold, tp, fp));
    }
    out
}

/// ROC points for every candidate threshold under the `score >= threshold`
/// rule, ordered by descending threshold.
pub fn roc_curve(scores: &[f64], labels: &[bool]) -> Result<Vec<RocPoint>> {
    let (pos, neg) = class_counts(scores, labels)?;
    Ok(threshold_counts(scores, labels)
        .into_iter()
        .map(|(threshold, tp, fp)| RocPoint { threshold, tpr: tp as f64 / pos as f64, fpr: fp as f64 / neg as f64 })
        .collect())
}

/// Area under the ROC curve as the Mann-Whitney statistic, using midranks
/// for tied scores.
pub fn auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    let (pos, neg) = class_counts(scores, labels)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // Ranks are 1-based; a tie block spanning ranks lo..=hi gets (lo+hi)/2.
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let midrank = (i + j + 2) as f64 / 2.0;
        let positives_in_block = order[i..=j].iter().filter(|&&k| labels[k]).count();
        rank_sum_pos += midrank * positives_in_block as f64;
        i = j + 1;
    }
    let u = rank_sum_pos - (pos * (pos + 1)) as f64 / 2.0;
    Ok(u / (pos as f64 * neg as f64))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cutoff {
    pub threshold: f64,
    /// Euclidean distance from (fpr, tpr) to (0, 1).
    pub distance: f64,
    pub tpr: f64,
    pub fpr: f64,
}

/// The ROC candidate threshold closest to the top-left corner. Ties go to
/// the larger threshold.
///
/// Distances are compared exactly on integer counts, so ties are real ties.
pub fn closest_topleft_cutoff(scores: &[f64], labels: &[bool]) -> Result<Cutoff> {
    let (pos, neg) = class_counts(scores, labels)?;
    let (p, n) = (pos as u128, neg as u128);
    // d^2 * P^2 * N^2 = (P - tp)^2 N^2 + fp^2 P^2
    let scaled = |tp: usize, fp: usize| {
        let miss = p - tp as u128;
        miss * miss * n * n + (fp as u128) * (fp as u128) * p * p
    };
    let mut best: Option<(u128, f64, usize, usize)> = None;
    for (threshold, tp, fp) in threshold_counts(scores, labels) {
        let d = scaled(tp, fp);
        if best.map_or(true, |(bd, ..)| d < bd) {
            best = Some((d, threshold, tp, fp));
        }
    }
    let (_, threshold, tp, fp) = best.expect("at least two candidates");
    let tpr = tp as f64 / pos as f64;
    let fpr = fp as f64 / neg as f64;
    Ok(Cutoff { threshold, distance: libm::sqrt((1.0 - tpr) * (1.0 - tpr) + fpr * fpr), tpr, fpr })
}

pub fn confusion(predictions: &[bool], labels: &[bool]) -> Result<ConfusionCounts> {
    if predictions.len() != labels.len() {
        return Err(Error::LengthMismatch { left: predictions.len(), right: labels.len() });
    }
    let mut c = ConfusionCounts::default();
    for (&p, &l) in predictions.iter().zip(labels) {
        match (p, l) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    Ok(c)
}

/// `2tp / (2tp + fp + fn)`, or 0 when nothing is positive in either sense.
pub fn f1_score(c: &ConfusionCounts) -> f64 {
    let denom = 2 * c.tp + c.fp + c.fn_;
    if denom == 0 {
        0.0
    } else {
        (2 * c.tp) as f64 / denom as f64
    }
}
