//! Evaluation against ground truth: ROC and precision-recall curves, the
//! two-sided orientation rule, rank correlation, and the comparison
//! statistics used by the simulation studies.

mod curves;

pub use curves::{auroc, average_precision, point_rates, pr_curve, roc_curve, PrCurve, RocCurve};

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::aggregators::threshold_scores;
use crate::error::{CrowdError, Result};
use crate::preprocess::average_ranks;
use crate::types::{GroundTruth, Orientation, ScoreVector};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport {
    pub method_tag: String,
    pub auroc: f64,
    pub aupr: f64,
    pub auroc_orientation: Orientation,
    pub aupr_orientation: Orientation,
}

/// Scores both the output and its negation and keeps, separately for each
/// metric, the orientation with the larger area. Exact ties keep the scores
/// as computed.
pub fn evaluate_two_sided(scores: &ScoreVector, truth: &GroundTruth) -> Result<MetricReport> {
    evaluate_scores_two_sided(&scores.scores, truth, &scores.method_tag)
}

pub fn evaluate_scores_two_sided(
    scores: &[f64],
    truth: &GroundTruth,
    method_tag: &str,
) -> Result<MetricReport> {
    let negated: Vec<f64> = scores.iter().map(|s| -s).collect();
    let roc = auroc(scores, truth)?;
    let roc_neg = auroc(&negated, truth)?;
    let ap = average_precision(scores, truth)?;
    let ap_neg = average_precision(&negated, truth)?;
    let pick = |a: f64, b: f64| {
        if b > a {
            (b, Orientation::Flipped)
        } else {
            (a, Orientation::AsComputed)
        }
    };
    let (auroc, auroc_orientation) = pick(roc, roc_neg);
    let (aupr, aupr_orientation) = pick(ap, ap_neg);
    Ok(MetricReport {
        method_tag: method_tag.to_string(),
        auroc,
        aupr,
        auroc_orientation,
        aupr_orientation,
    })
}

/// Absolute Spearman rank correlation with tie-averaged ranks.
pub fn spearman_abs(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(CrowdError::InvalidArgument(format!(
            "lengths differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let ra = average_ranks(a);
    let rb = average_ranks(b);
    crate::aggregators::pearson(&ra, &rb)
        .map(f64::abs)
        .ok_or_else(|| CrowdError::UndefinedCorrelation("constant input".into()))
}

/// Interpolated TPR of `curve` at the other method's FPR, minus that
/// method's TPR.
pub fn tpr_difference_at_fpr(curve: &RocCurve, other_point: (f64, f64)) -> f64 {
    curve.tpr_at(other_point.0) - other_point.1
}

/// Fraction of questions where thresholded scores disagree with a binary
/// crowd answer.
///
/// Scores are negated if their AUROC against the binary answer (used as
/// pseudo-labels) is below 0.5, then thresholded so that as many questions
/// are positive as in `binary_cw`. A single-valued `binary_cw` yields
/// [`CrowdError::Excluded`].
pub fn proportion_of_differences(binary_cw: &[bool], scores: &ScoreVector) -> Result<f64> {
    if binary_cw.len() != scores.len() {
        return Err(CrowdError::InvalidArgument(format!(
            "{} binary answers for {} scores",
            binary_cw.len(),
            scores.len()
        )));
    }
    let pseudo = GroundTruth::new(binary_cw.to_vec());
    if !pseudo.has_both_classes() {
        return Err(CrowdError::Excluded(
            "binary crowd wisdom is single-valued".into(),
        ));
    }
    let oriented: Vec<f64> = if auroc(&scores.scores, &pseudo)? < 0.5 {
        scores.scores.iter().map(|s| -s).collect()
    } else {
        scores.scores.clone()
    };
    let thresholded = threshold_scores(&oriented, pseudo.positives());
    let differ = thresholded
        .iter()
        .zip(binary_cw)
        .filter(|(a, b)| a != b)
        .count();
    Ok(differ as f64 / binary_cw.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TTest {
    pub n: usize,
    pub mean: f64,
    pub std_dev: f64,
    pub t: f64,
    /// One-sided p-value for the alternative "mean > 0".
    pub p_value: f64,
}

/// One-sample Student's t-test of `mean > 0`.
pub fn one_sided_t_test(samples: &[f64]) -> Result<TTest> {
    let n = samples.len();
    if n < 2 {
        return Err(CrowdError::InvalidArgument(
            "t-test needs at least two samples".into(),
        ));
    }
    let nf = n as f64;
    let mean = samples.iter().sum::<f64>() / nf;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    let std_dev = var.sqrt();
    if std_dev == 0.0 {
        return Err(CrowdError::Degenerate("t-test on constant samples".into()));
    }
    let t = mean / (std_dev / nf.sqrt());
    let dist = StudentsT::new(0.0, 1.0, nf - 1.0)
        .map_err(|e| CrowdError::Numerical(format!("Student t distribution: {e}")))?;
    Ok(TTest {
        n,
        mean,
        std_dev,
        t,
        p_value: dist.sf(t),
    })
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    })
}
