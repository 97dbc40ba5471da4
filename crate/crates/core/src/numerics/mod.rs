//! Deterministic dense kernels: symmetric eigensolver, Cholesky solve,
//! geodesic distances and Gram-matrix recovery.

mod cholesky;
mod eigen;
mod graph;

pub use cholesky::{cholesky, solve_spd};
pub use eigen::{check_symmetric, orient, sym_eig_bottom, sym_eig_full, sym_eig_top, EigenResult};
pub use graph::{all_pairs_shortest_paths, dijkstra, Graph};

use ndarray::{Array2, ArrayView2};

use crate::error::{CrowdError, Result};

/// `B = -1/2 J D2 J` with `J = I - 11^T / n`, from squared distances.
pub fn double_center(d2: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    let (n, c) = d2.dim();
    if n != c {
        return Err(CrowdError::Contract(format!("distance matrix is {n}x{c}")));
    }
    check_symmetric(d2)?;
    for i in 0..n {
        if d2[[i, i]] != 0.0 {
            return Err(CrowdError::Contract(format!(
                "distance matrix diagonal is {} at {i}",
                d2[[i, i]]
            )));
        }
    }
    if d2.iter().any(|&v| v < 0.0) {
        return Err(CrowdError::Contract("negative squared distance".into()));
    }
    let nf = n as f64;
    let row: Vec<f64> = d2.rows().into_iter().map(|r| r.sum() / nf).collect();
    let grand = row.iter().sum::<f64>() / nf;
    let mut b = Array2::zeros((n, n));
    for i in 0..n {
        for j in i..n {
            let v = -0.5 * (d2[[i, j]] - row[i] - row[j] + grand);
            b[[i, j]] = v;
            b[[j, i]] = v;
        }
    }
    Ok(b)
}

/// Squared Euclidean distances between the columns of `x`.
pub fn squared_distances_between_columns(x: ArrayView2<'_, f64>) -> Array2<f64> {
    let n = x.ncols();
    let mut d = Array2::zeros((n, n));
    for i in 0..n {
        for j in (i + 1)..n {
            let s: f64 = x
                .column(i)
                .iter()
                .zip(x.column(j))
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            d[[i, j]] = s;
            d[[j, i]] = s;
        }
    }
    d
}
