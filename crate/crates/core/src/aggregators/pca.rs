use crate::error::{CrowdError, Result};
use crate::numerics::sym_eig_full;
use crate::types::{ResponseMatrix, ScoreVector};

/// First principal direction of the question-by-individual matrix.
///
/// No centering is applied beyond what normalization already did (each
/// individual has zero mean after z-scoring), so this is a truncated SVD of
/// the normalized data.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaFit {
    /// One weight per individual: the first right-singular vector.
    pub loadings: Vec<f64>,
    /// Squared first singular value.
    pub eigenvalue: f64,
    pub explained_variance_ratio: f64,
    pub scores: Vec<f64>,
}

pub fn pca(matrix: &ResponseMatrix) -> Result<PcaFit> {
    let r = matrix.values();
    if r.iter().all(|&v| v == 0.0) {
        return Err(CrowdError::Degenerate("PCA of an all-zero matrix".into()));
    }
    // The k x k Gram matrix R R^T shares its eigenvectors with the right
    // singular vectors of the n x k matrix R^T.
    let gram = r.dot(&r.t());
    let eig = sym_eig_full(gram.view())?;
    let top = eig.values.len() - 1;
    let total: f64 = eig.values.iter().map(|v| v.max(0.0)).sum();
    let loadings = eig.vector(top);
    let scores = r.t().dot(&ndarray::ArrayView1::from(&loadings)).to_vec();
    Ok(PcaFit {
        eigenvalue: eig.values[top],
        explained_variance_ratio: eig.values[top] / total,
        loadings,
        scores,
    })
}

pub fn pca_scores(matrix: &ResponseMatrix) -> Result<ScoreVector> {
    Ok(ScoreVector::new(pca(matrix)?.scores, "pca"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preprocess::standardize;
    use crate::types::{default_ids, Kind};
    use ndarray::{array, Array2};

    fn cont(values: Array2<f64>) -> ResponseMatrix {
        let (k, n) = values.dim();
        ResponseMatrix::from_parts(
            values,
            default_ids("I", k),
            default_ids("Q", n),
            Kind::Continuous,
        )
    }

    #[test]
    fn correlated_pair() {
        let (m, _) = standardize(&cont(array![[1.0, 2.0, 4.0, 3.0], [2.0, 4.0, 8.0, 6.0]]));
        let fit = pca(&m).unwrap();
        let row = m.values().row(0);
        let ratio = fit.scores[0] / row[0];
        for (s, r) in fit.scores.iter().zip(row) {
            assert!((s - ratio * r).abs() < 1e-12);
        }
        assert!((fit.explained_variance_ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn anti_correlated_pair() {
        let (m, _) = standardize(&cont(array![
            [1.0, 2.0, 4.0, 3.0],
            [-1.0, -2.0, -4.0, -3.0]
        ]));
        let fit = pca(&m).unwrap();
        let row = m.values().row(0);
        let ratio = fit.scores[0].abs() / row[0].abs();
        for (s, r) in fit.scores.iter().zip(row) {
            assert!((s.abs() - ratio * r.abs()).abs() < 1e-12);
        }
        assert!((fit.explained_variance_ratio - 1.0).abs() < 1e-12);
        assert!((fit.loadings[0] + fit.loadings[1]).abs() < 1e-12);
    }

    #[test]
    fn zero_matrix_is_degenerate() {
        let m = cont(Array2::zeros((3, 4)));
        assert!(matches!(pca_scores(&m), Err(CrowdError::Degenerate(_))));
    }
}
