use ndarray::ArrayView2;

use crate::error::Result;
use crate::numerics::Graph;

/// For every column of `x`, the indices and Euclidean distances of its
/// `k` nearest other columns. Distance ties go to the lower index.
pub fn nearest_neighbors(x: ArrayView2<'_, f64>, k: usize) -> Vec<Vec<(usize, f64)>> {
    let n = x.ncols();
    let cols: Vec<Vec<f64>> = x.columns().into_iter().map(|c| c.to_vec()).collect();
    (0..n)
        .map(|i| {
            let mut d: Vec<(usize, f64)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let s: f64 = cols[i]
                        .iter()
                        .zip(&cols[j])
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum();
                    (j, s.sqrt())
                })
                .collect();
            d.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
            d.truncate(k);
            d
        })
        .collect()
}

/// Union-symmetrized k-nearest-neighbor graph over the columns of `x`, with
/// Euclidean edge weights.
pub fn knn_graph(x: ArrayView2<'_, f64>, k: usize) -> Result<Graph> {
    let mut g = Graph::new(x.ncols());
    for (i, nbrs) in nearest_neighbors(x, k).into_iter().enumerate() {
        for (j, d) in nbrs {
            g.add_edge(i, j, d)?;
        }
    }
    Ok(g)
}
