use serde::Serialize;

use crate::error::{CrowdError, Result};
use crate::types::GroundTruth;

/// ROC curve with one vertex per distinct score plus the origin.
///
/// `thresholds[i]` is the score at or above which vertex `i` predicts
/// positive; the origin's threshold is `+inf`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RocCurve {
    pub fpr: Vec<f64>,
    pub tpr: Vec<f64>,
    pub thresholds: Vec<f64>,
    #[serde(skip)]
    counts: Vec<(u64, u64)>,
    #[serde(skip)]
    totals: (u64, u64),
}

/// Precision-recall vertices, one per distinct score.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrCurve {
    pub recall: Vec<f64>,
    pub precision: Vec<f64>,
    pub thresholds: Vec<f64>,
    pub average_precision: f64,
}

fn check_lengths(scores: &[f64], truth: &GroundTruth) -> Result<()> {
    if scores.len() != truth.len() {
        return Err(CrowdError::InvalidArgument(format!(
            "{} scores for {} labels",
            scores.len(),
            truth.len()
        )));
    }
    if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
        return Err(CrowdError::InvalidArgument(format!(
            "score {i} is not finite"
        )));
    }
    Ok(())
}

/// Cumulative (true positive, false positive) counts at each distinct score,
/// scanning from the highest score down.
fn cumulative_counts(scores: &[f64], truth: &GroundTruth) -> Vec<(f64, u64, u64)> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut out = Vec::new();
    let (mut tp, mut fp) = (0u64, 0u64);
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if truth.labels[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        out.push((s, tp, fp));
    }
    out
}

pub fn roc_curve(scores: &[f64], truth: &GroundTruth) -> Result<RocCurve> {
    check_lengths(scores, truth)?;
    truth.require_both_classes()?;
    let pos = truth.positives() as u64;
    let neg = truth.negatives() as u64;
    let steps = cumulative_counts(scores, truth);
    let mut counts = vec![(0, 0)];
    let mut thresholds = vec![f64::INFINITY];
    for (s, tp, fp) in steps {
        counts.push((tp, fp));
        thresholds.push(s);
    }
    Ok(RocCurve {
        fpr: counts
            .iter()
            .map(|&(_, fp)| fp as f64 / neg as f64)
            .collect(),
        tpr: counts
            .iter()
            .map(|&(tp, _)| tp as f64 / pos as f64)
            .collect(),
        thresholds,
        counts,
        totals: (pos, neg),
    })
}

impl RocCurve {
    /// Trapezoidal area, accumulated in integer counts so that it equals the
    /// tie-corrected Mann-Whitney statistic `U / (n1 n0)`.
    pub fn auc(&self) -> f64 {
        let twice_u: u64 = self
            .counts
            .windows(2)
            .map(|w| (w[1].1 - w[0].1) * (w[1].0 + w[0].0))
            .sum();
        twice_u as f64 / (2 * self.totals.0 * self.totals.1) as f64
    }

    /// TPR at a given FPR, linear between vertices. Where the curve rises
    /// vertically at exactly `fpr`, the highest TPR at that FPR is used.
    pub fn tpr_at(&self, fpr: f64) -> f64 {
        let fpr = fpr.clamp(0.0, 1.0);
        let last_le = self.fpr.iter().rposition(|&f| f <= fpr).unwrap_or(0);
        if self.fpr[last_le] == fpr || last_le + 1 == self.fpr.len() {
            return self.tpr[last_le];
        }
        let (f0, t0) = (self.fpr[last_le], self.tpr[last_le]);
        let (f1, t1) = (self.fpr[last_le + 1], self.tpr[last_le + 1]);
        t0 + (t1 - t0) * (fpr - f0) / (f1 - f0)
    }
}

pub fn pr_curve(scores: &[f64], truth: &GroundTruth) -> Result<PrCurve> {
    check_lengths(scores, truth)?;
    let pos = truth.positives();
    if pos == 0 {
        return Err(CrowdError::ClassPresence {
            positives: 0,
            negatives: truth.negatives(),
        });
    }
    let mut recall = Vec::new();
    let mut precision = Vec::new();
    let mut thresholds = Vec::new();
    let mut ap = 0.0;
    let mut prev_recall = 0.0;
    for (s, tp, fp) in cumulative_counts(scores, truth) {
        let r = tp as f64 / pos as f64;
        let p = tp as f64 / (tp + fp) as f64;
        ap += (r - prev_recall) * p;
        prev_recall = r;
        recall.push(r);
        precision.push(p);
        thresholds.push(s);
    }
    Ok(PrCurve {
        recall,
        precision,
        thresholds,
        average_precision: ap,
    })
}

pub fn auroc(scores: &[f64], truth: &GroundTruth) -> Result<f64> {
    Ok(roc_curve(scores, truth)?.auc())
}

pub fn average_precision(scores: &[f64], truth: &GroundTruth) -> Result<f64> {
    Ok(pr_curve(scores, truth)?.average_precision)
}

/// False and true positive rates of hard binary predictions.
pub fn point_rates(predictions: &[bool], truth: &GroundTruth) -> Result<(f64, f64)> {
    if predictions.len() != truth.len() {
        return Err(CrowdError::InvalidArgument(format!(
            "{} predictions for {} labels",
            predictions.len(),
            truth.len()
        )));
    }
    truth.require_both_classes()?;
    let (mut tp, mut fp) = (0usize, 0usize);
    for (&p, &t) in predictions.iter().zip(&truth.labels) {
        match (p, t) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            _ => {}
        }
    }
    Ok((
        fp as f64 / truth.negatives() as f64,
        tp as f64 / truth.positives() as f64,
    ))
}
