//! Per-individual normalization and perfect binarization.
//!
//! Continuous responses are rank-converted (ties averaged) and then
//! z-scored; binary responses are only z-scored. Both steps work row by row,
//! one individual at a time.

use ndarray::{Array2, ArrayView1, Axis};
use rand::seq::SliceRandom;

use crate::error::{CrowdError, Result};
use crate::seed::{mix_seed, rng_from_seed};
use crate::types::{GroundTruth, Kind, ResponseMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NormalizationSpec {
    pub rank_convert: bool,
    pub center_scale: bool,
}

impl NormalizationSpec {
    /// The standard protocol: ranks for continuous input, then z-scores.
    pub fn for_kind(kind: Kind) -> Self {
        Self {
            rank_convert: kind == Kind::Continuous,
            center_scale: true,
        }
    }
}

/// Output of [`normalize`]: the transformed matrix plus one warning per
/// constant individual.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalized {
    pub matrix: ResponseMatrix,
    pub warnings: Vec<String>,
}

pub fn normalize(matrix: &ResponseMatrix, spec: NormalizationSpec) -> Result<Normalized> {
    if spec.rank_convert && matrix.kind() != Kind::Continuous {
        return Err(CrowdError::InvalidKind(
            "rank conversion applies to continuous matrices only".into(),
        ));
    }
    let ranked;
    let base = if spec.rank_convert {
        ranked = rank_transform(matrix)?;
        &ranked
    } else {
        matrix
    };
    if spec.center_scale {
        let (matrix, warnings) = standardize(base);
        Ok(Normalized { matrix, warnings })
    } else {
        Ok(Normalized {
            matrix: base.clone(),
            warnings: Vec::new(),
        })
    }
}

/// Ranks `1..=n` with tied values sharing the average of their rank range.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut ranks = vec![0.0; n];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1..=end
        let avg = (start + 1 + end) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = avg;
        }
        start = end;
    }
    ranks
}

pub fn rank_transform(matrix: &ResponseMatrix) -> Result<ResponseMatrix> {
    if matrix.kind() != Kind::Continuous {
        return Err(CrowdError::InvalidKind(
            "rank_transform requires a continuous matrix".into(),
        ));
    }
    let mut out = Array2::zeros(matrix.values().dim());
    for (src, mut dst) in matrix
        .values()
        .axis_iter(Axis(0))
        .zip(out.axis_iter_mut(Axis(0)))
    {
        let ranks = average_ranks(&src.to_vec());
        dst.assign(&ArrayView1::from(&ranks));
    }
    Ok(matrix.with_values(out, Kind::Continuous))
}

/// Population mean and standard deviation of a row.
fn moments(row: ArrayView1<'_, f64>) -> (f64, f64) {
    let n = row.len() as f64;
    let mean = row.sum() / n;
    let var = row.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Z-scores every row with the population (divide-by-n) variance. Constant
/// rows become zeros and are listed in the returned warnings.
pub fn standardize(matrix: &ResponseMatrix) -> (ResponseMatrix, Vec<String>) {
    let mut out = matrix.values().clone();
    let mut warnings = Vec::new();
    for (j, mut row) in out.axis_iter_mut(Axis(0)).enumerate() {
        let (mean, sd) = moments(row.view());
        let scale = row.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if sd <= 1e-12 * scale || sd == 0.0 {
            row.fill(0.0);
            warnings.push(format!(
                "individual {} has constant responses; set to zero",
                matrix.individual_ids().get(j).map_or("?", |s| s.as_str())
            ));
        } else {
            row.mapv_inplace(|v| (v - mean) / sd);
        }
    }
    (matrix.with_values(out, Kind::Continuous), warnings)
}

/// Each individual answers "yes" on exactly as many questions as the truth
/// has positives, choosing their highest-scoring questions. Ties at the
/// boundary are drawn uniformly with a per-row stream derived from `seed`.
pub fn perfect_binarize(
    matrix: &ResponseMatrix,
    truth: &GroundTruth,
    seed: u64,
) -> Result<ResponseMatrix> {
    let n = matrix.n_questions();
    if truth.len() != n {
        return Err(CrowdError::InvalidArgument(format!(
            "truth has {} labels for {n} questions",
            truth.len()
        )));
    }
    let m = truth.positives();
    if m == 0 || m == n {
        return Err(CrowdError::DegenerateTruth { positives: m, n });
    }
    let mut out = Array2::zeros(matrix.values().dim());
    for (j, (src, mut dst)) in matrix
        .values()
        .axis_iter(Axis(0))
        .zip(out.axis_iter_mut(Axis(0)))
        .enumerate()
    {
        for i in top_m_with_random_ties(src, m, mix_seed(seed, j as u64)) {
            dst[i] = 1.0;
        }
    }
    Ok(matrix.with_values(out, Kind::Binary))
}

fn top_m_with_random_ties(row: ArrayView1<'_, f64>, m: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..row.len()).collect();
    order.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
    let boundary = row[order[m - 1]];
    let mut chosen: Vec<usize> = order
        .iter()
        .copied()
        .filter(|&i| row[i] > boundary)
        .collect();
    let mut tied: Vec<usize> = order
        .iter()
        .copied()
        .filter(|&i| row[i] == boundary)
        .collect();
    let need = m - chosen.len();
    if tied.len() > need {
        tied.sort_unstable();
        let mut rng = rng_from_seed(seed);
        let (picked, _) = tied.partial_shuffle(&mut rng, need);
        chosen.extend_from_slice(picked);
    } else {
        chosen.extend_from_slice(&tied);
    }
    chosen
}
