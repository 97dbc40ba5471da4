//! Spectral meta-learner for binary responses.
//!
//! For conditionally independent binary classifiers the off-diagonal part of
//! the covariance of their ±1 responses is rank one, and the leading
//! eigenvector of that rank-one matrix ranks the classifiers by balanced
//! accuracy. The diagonal is unknown, so it is imputed from the current
//! rank-one fit and the leading eigenpair recomputed until it settles.

use ndarray::{Array1, Array2, Axis};

use super::require_kind;
use crate::error::Result;
use crate::numerics::sym_eig_top;
use crate::types::{Kind, ResponseMatrix, ScoreVector};

pub const MAX_ITERATIONS: usize = 100;
pub const TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct SmlFit {
    /// One weight per individual; zero for constant individuals.
    pub weights: Vec<f64>,
    pub eigenvalue: f64,
    pub iterations: usize,
    /// Weighted sum of ±1 responses per question.
    pub scores: Vec<f64>,
    pub warnings: Vec<String>,
}

pub fn sml(matrix: &ResponseMatrix) -> Result<SmlFit> {
    require_kind(matrix, Kind::Binary, "sml")?;
    let signed = matrix.values().mapv(|v| 2.0 * v - 1.0);
    let (k, n) = signed.dim();
    let mean = signed.mean_axis(Axis(1)).expect("non-empty");
    let centered = &signed - &mean.clone().insert_axis(Axis(1));
    let mut q: Array2<f64> = centered.dot(&centered.t()) / (n as f64 - 1.0);

    let mut warnings = Vec::new();
    let constant: Vec<bool> = (0..k).map(|j| q[[j, j]] == 0.0).collect();
    for (j, _) in constant.iter().enumerate().filter(|(_, c)| **c) {
        warnings.push(format!(
            "sml: individual {} gives constant responses; weight set to 0",
            matrix.individual_ids()[j]
        ));
    }

    let top = sym_eig_top(q.view(), 1)?;
    let mut lambda = top.values[0];
    let mut v = Array1::from(top.vector(0));
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        for j in 0..k {
            q[[j, j]] = lambda * v[j] * v[j];
        }
        let next = sym_eig_top(q.view(), 1)?;
        let mut nv = Array1::from(next.vector(0));
        if nv.dot(&v) < 0.0 {
            nv.mapv_inplace(|x| -x);
        }
        let change = (&nv - &v).iter().fold(0.0f64, |m, x| m.max(x.abs()));
        lambda = next.values[0];
        v = nv;
        iterations += 1;
        if change < TOLERANCE {
            break;
        }
    }
    for (j, c) in constant.iter().enumerate() {
        if *c {
            v[j] = 0.0;
        }
    }
    // Most individuals are assumed better than random.
    if v.sum() < 0.0 {
        v.mapv_inplace(|x| -x);
    }
    let scores = signed.t().dot(&v).to_vec();
    Ok(SmlFit {
        weights: v.to_vec(),
        eigenvalue: lambda,
        iterations,
        scores,
        warnings,
    })
}

pub fn sml_scores(matrix: &ResponseMatrix) -> Result<ScoreVector> {
    let fit = sml(matrix)?;
    let mut out = ScoreVector::new(fit.scores, "sml");
    out.warnings = fit.warnings;
    Ok(out)
}

/// Binary SML labels: positive where the weighted vote is positive.
pub fn sml_predict(scores: &ScoreVector) -> Vec<bool> {
    scores.scores.iter().map(|&s| s > 0.0).collect()
}
