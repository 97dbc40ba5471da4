//! Single-factor analysis fit by expectation-maximization.
//!
//! Each question's response vector is modeled as `x = lambda * z + eps`, with
//! `z ~ N(0, 1)` and `eps ~ N(0, diag(psi))`. The covariance
//! `lambda lambda^T + diag(psi)` is inverted in closed form (Woodbury), so a
//! step costs O(k^2) given the sample covariance.

use std::f64::consts::PI;

use ndarray::{Array1, Array2, Axis};

use crate::error::{CrowdError, Result};
use crate::numerics::{orient, sym_eig_top};
use crate::types::{ResponseMatrix, ScoreVector};

pub const MAX_ITERATIONS: usize = 1000;
/// Convergence threshold on the per-question log-likelihood gain.
pub const TOLERANCE: f64 = 1e-6;
/// Relative log-likelihood drop treated as divergence.
const DIVERGENCE: f64 = 1e-8;
/// Lower bound on each uniqueness, relative to that individual's variance.
const PSI_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct FactorFit {
    pub loadings: Vec<f64>,
    pub uniquenesses: Vec<f64>,
    /// Posterior-mean factor scores, one per question.
    pub scores: Vec<f64>,
    /// Mean log-likelihood per question at the final parameters.
    pub log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
}

struct Params {
    lambda: Array1<f64>,
    psi: Array1<f64>,
}

impl Params {
    /// `Sigma^{-1} lambda` written as a row: `beta = u / (1 + c)`.
    fn beta(&self) -> (Array1<f64>, Array1<f64>, f64) {
        let u = &self.lambda / &self.psi;
        let c = self.lambda.dot(&u);
        let beta = &u / (1.0 + c);
        (beta, u, c)
    }

    fn log_likelihood(&self, s: &Array2<f64>) -> f64 {
        let k = self.lambda.len() as f64;
        let (_, u, c) = self.beta();
        let log_det = self.psi.iter().map(|p| p.ln()).sum::<f64>() + (1.0 + c).ln();
        let trace = s
            .diag()
            .iter()
            .zip(&self.psi)
            .map(|(d, p)| d / p)
            .sum::<f64>()
            - u.dot(&s.dot(&u)) / (1.0 + c);
        -0.5 * (k * (2.0 * PI).ln() + log_det + trace)
    }
}

pub fn factor_analysis(matrix: &ResponseMatrix) -> Result<FactorFit> {
    let k = matrix.n_individuals();
    let n = matrix.n_questions();
    if k < 3 {
        return Err(CrowdError::InvalidArgument(format!(
            "factor analysis needs at least 3 individuals, got {k}"
        )));
    }
    let x = matrix.values();
    let mean = x.mean_axis(Axis(1)).expect("non-empty");
    let xc = x - &mean.insert_axis(Axis(1));
    let s = xc.dot(&xc.t()) / n as f64;
    let var = s.diag().to_owned();
    if var.iter().all(|&v| v == 0.0) {
        return Err(CrowdError::Degenerate(
            "factor analysis of constant responses".into(),
        ));
    }
    let floor = var.mapv(|v| PSI_FLOOR * v.max(f64::MIN_POSITIVE));

    let top = sym_eig_top(s.view(), 1)?;
    let scale = top.values[0].max(0.0).sqrt();
    let lambda = Array1::from(top.vector(0)) * scale;
    let psi = Array1::from_iter(
        var.iter()
            .zip(&lambda)
            .zip(&floor)
            .map(|((v, l), f)| (v - l * l).max(0.5 * v).max(*f)),
    );
    let mut p = Params { lambda, psi };

    let mut ll = p.log_likelihood(&s);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < MAX_ITERATIONS {
        let (beta, _, _) = p.beta();
        let s_beta = s.dot(&beta);
        let ezz = 1.0 - beta.dot(&p.lambda) + beta.dot(&s_beta);
        let lambda = &s_beta / ezz;
        let psi =
            Array1::from_iter((0..k).map(|j| (s[[j, j]] - lambda[j] * s_beta[j]).max(floor[j])));
        p = Params { lambda, psi };
        iterations += 1;

        let next = p.log_likelihood(&s);
        if !next.is_finite() {
            return Err(CrowdError::Numerical(
                "factor analysis log-likelihood is not finite".into(),
            ));
        }
        if next < ll - DIVERGENCE * ll.abs().max(1.0) {
            return Err(CrowdError::Numerical(format!(
                "factor analysis EM diverged at iteration {iterations}: {ll} -> {next}"
            )));
        }
        let gain = next - ll;
        ll = next;
        if gain < TOLERANCE {
            converged = true;
            break;
        }
    }

    let mut loadings = p.lambda.to_vec();
    let sign = if orient(&mut loadings) { -1.0 } else { 1.0 };
    let (beta, _, _) = p.beta();
    let scores = xc.t().dot(&beta).mapv(|v| sign * v).to_vec();
    Ok(FactorFit {
        loadings,
        uniquenesses: p.psi.to_vec(),
        scores,
        log_likelihood: ll,
        iterations,
        converged,
    })
}

pub fn factor_analysis_scores(matrix: &ResponseMatrix) -> Result<ScoreVector> {
    let fit = factor_analysis(matrix)?;
    let mut out = ScoreVector::new(fit.scores, "fa");
    if !fit.converged {
        out.warnings.push(format!(
            "fa: EM stopped after {MAX_ITERATIONS} iterations without converging"
        ));
    }
    Ok(out)
}
