//! Embeddings that treat each question as a point in individual space:
//! classical MDS, Isomap, locally linear embedding and spectral embedding.

use ndarray::{Array1, Array2};

use super::neighbors::{knn_graph, nearest_neighbors};
use crate::error::{CrowdError, Result};
use crate::numerics::{
    all_pairs_shortest_paths, double_center, solve_spd, squared_distances_between_columns,
    sym_eig_full, sym_eig_top,
};
use crate::types::{ResponseMatrix, ScoreVector};

const LLE_RIDGE: f64 = 1e-3;
const TIE_TOLERANCE: f64 = 1e-8;

/// Top eigenvector of the double-centered squared distances, scaled by the
/// square root of its eigenvalue.
fn embed_first_coordinate(d2: &Array2<f64>, who: &str) -> Result<Vec<f64>> {
    let b = double_center(d2.view())?;
    let top = sym_eig_top(b.view(), 1)?;
    let lambda = top.values[0];
    if !(lambda > 0.0) {
        return Err(CrowdError::Degenerate(format!(
            "{who}: top eigenvalue {lambda:e} is not positive"
        )));
    }
    let s = lambda.sqrt();
    Ok(top.vector(0).into_iter().map(|v| v * s).collect())
}

pub fn mds_scores(matrix: &ResponseMatrix) -> Result<ScoreVector> {
    let d2 = squared_distances_between_columns(matrix.values().view());
    Ok(ScoreVector::new(embed_first_coordinate(&d2, "mds")?, "mds"))
}

pub fn isomap_scores(matrix: &ResponseMatrix, n_neighbors: usize) -> Result<ScoreVector> {
    let graph = knn_graph(matrix.values().view(), n_neighbors)?;
    let geodesic = all_pairs_shortest_paths(&graph)?;
    let d2 = geodesic.mapv(|d| d * d);
    Ok(ScoreVector::new(
        embed_first_coordinate(&d2, "isomap")?,
        format!("isomap({n_neighbors})"),
    ))
}

/// Reconstruction weights: row `i` holds the affine weights that best
/// rebuild question `i` from its neighbors. Every row sums to one.
pub fn lle_weights(matrix: &ResponseMatrix, n_neighbors: usize) -> Result<Array2<f64>> {
    let x = matrix.values();
    let n = x.ncols();
    let mut w = Array2::zeros((n, n));
    for (i, nbrs) in nearest_neighbors(x.view(), n_neighbors)
        .into_iter()
        .enumerate()
    {
        let kk = nbrs.len();
        let diffs: Vec<Array1<f64>> = nbrs
            .iter()
            .map(|&(j, _)| &x.column(j) - &x.column(i))
            .collect();
        let mut c = Array2::zeros((kk, kk));
        for a in 0..kk {
            for b in a..kk {
                let v = diffs[a].dot(&diffs[b]);
                c[[a, b]] = v;
                c[[b, a]] = v;
            }
        }
        let trace = c.diag().sum();
        let ridge = if trace > 0.0 {
            LLE_RIDGE * trace / kk as f64
        } else {
            LLE_RIDGE
        };
        for a in 0..kk {
            c[[a, a]] += ridge;
        }
        let sol = solve_spd(c.view(), Array1::ones(kk).view())?;
        let total = sol.sum();
        for (&(j, _), v) in nbrs.iter().zip(sol.iter()) {
            w[[i, j]] = v / total;
        }
    }
    Ok(w)
}

pub fn lle_scores(matrix: &ResponseMatrix, n_neighbors: usize) -> Result<ScoreVector> {
    if n_neighbors < 2 {
        return Err(CrowdError::InvalidArgument(
            "lle needs at least 2 neighbors".into(),
        ));
    }
    knn_graph(matrix.values().view(), n_neighbors)?.require_connected()?;
    let w = lle_weights(matrix, n_neighbors)?;
    let n = w.nrows();
    let iw = Array2::<f64>::eye(n) - &w;
    let m = iw.t().dot(&iw);
    let eig = sym_eig_full(m.view())?;
    let mut out = ScoreVector::new(eig.vector(1), format!("lle({n_neighbors})"));
    if n > 2 && (eig.values[2] - eig.values[1]).abs() < TIE_TOLERANCE {
        out.warnings.push(format!(
            "lle({n_neighbors}): second and third eigenvalues tie; embedding direction is arbitrary"
        ));
    }
    Ok(out)
}

pub fn spectral_scores(matrix: &ResponseMatrix, n_neighbors: usize) -> Result<ScoreVector> {
    let graph = knn_graph(matrix.values().view(), n_neighbors)?;
    graph.require_connected()?;
    let n = graph.len();
    let inv_sqrt_deg: Vec<f64> = (0..n)
        .map(|i| 1.0 / (graph.degree(i) as f64).sqrt())
        .collect();
    let mut l = Array2::<f64>::eye(n);
    for i in 0..n {
        for &(j, _) in graph.neighbors(i) {
            l[[i, j]] = -inv_sqrt_deg[i] * inv_sqrt_deg[j];
        }
    }
    let eig = sym_eig_full(l.view())?;
    let fiedler = eig.vector(1);
    let scores = fiedler
        .iter()
        .zip(&inv_sqrt_deg)
        .map(|(v, s)| v * s)
        .collect();
    let mut out = ScoreVector::new(scores, format!("spectral({n_neighbors})"));
    if n > 2 && (eig.values[2] - eig.values[1]).abs() < TIE_TOLERANCE {
        out.warnings.push(format!(
            "spectral({n_neighbors}): Fiedler eigenvalue is tied; embedding direction is arbitrary"
        ));
    }
    Ok(out)
}
