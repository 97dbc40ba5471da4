//! Independent reference implementations used by the integration tests.
//! Nothing here calls into the library's numerics or metrics.
#![allow(dead_code)]

use crowdwise::numerics::Graph;
use crowdwise::preprocess::{normalize, NormalizationSpec};
use crowdwise::types::{Kind, ResponseMatrix};
use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// k x n matrix of uniform draws, z-scored per individual the way the
/// aggregators expect.
pub fn random_normalized(rng: &mut ChaCha20Rng, k: usize, n: usize) -> ResponseMatrix {
    let values = Array2::from_shape_fn((k, n), |_| rng.random::<f64>());
    let raw = ResponseMatrix::with_default_ids(values, Kind::Continuous).unwrap();
    normalize(
        &raw,
        NormalizationSpec {
            rank_convert: false,
            center_scale: true,
        },
    )
    .unwrap()
    .matrix
}

/// Average ranks, 1-based, computed by counting.
pub fn ranks(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|&x| {
            let below = v.iter().filter(|&&y| y < x).count() as f64;
            let equal = v.iter().filter(|&&y| y == x).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect()
}

pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}

pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    pearson(&ranks(a), &ranks(b))
}

/// PCA by eigendecomposition of the dense sample covariance of the
/// question-by-individual data (nalgebra), projected on the top eigenvector.
pub fn pca_oracle(m: &ResponseMatrix) -> Vec<f64> {
    let x = m.values();
    let (k, n) = x.dim();
    let data = DMatrix::from_fn(n, k, |q, i| x[[i, q]]);
    let means = data.row_mean();
    let centered = DMatrix::from_fn(n, k, |q, i| data[(q, i)] - means[i]);
    let cov = centered.transpose() * &centered / (n as f64 - 1.0);
    let eig = SymmetricEigen::new(cov);
    let top = eig.eigenvalues.imax();
    let v = eig.eigenvectors.column(top);
    (&centered * v).iter().copied().collect()
}

/// Largest absolute difference after matching the sign of `b` to `a`.
pub fn max_diff_up_to_sign(a: &[f64], b: &[f64]) -> f64 {
    let d = |s: f64| {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - s * y).abs())
            .fold(0.0, f64::max)
    };
    d(1.0).min(d(-1.0))
}

/// Mann-Whitney AUROC by comparing every positive with every negative;
/// ties count one half.
pub fn mann_whitney(scores: &[f64], labels: &[bool]) -> f64 {
    let (mut wins, mut pairs) = (0.0, 0.0);
    for (i, &si) in scores.iter().enumerate() {
        if !labels[i] {
            continue;
        }
        for (j, &sj) in scores.iter().enumerate() {
            if labels[j] {
                continue;
            }
            pairs += 1.0;
            if si > sj {
                wins += 1.0;
            } else if si == sj {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

/// Average precision by brute force: mean over positives of the precision
/// among all questions scoring at least as high (ties resolved pessimistically
/// as a group, matching a step-wise curve over distinct thresholds).
pub fn average_precision_oracle(scores: &[f64], labels: &[bool]) -> f64 {
    let mut thresholds: Vec<f64> = scores.to_vec();
    thresholds.sort_by(|a, b| b.total_cmp(a));
    thresholds.dedup();
    let total_pos = labels.iter().filter(|&&l| l).count() as f64;
    let mut ap = 0.0;
    let mut prev_recall = 0.0;
    for t in thresholds {
        let selected: Vec<bool> = scores.iter().map(|&s| s >= t).collect();
        let tp = selected
            .iter()
            .zip(labels)
            .filter(|(s, l)| **s && **l)
            .count() as f64;
        let pp = selected.iter().filter(|&&s| s).count() as f64;
        let recall = tp / total_pos;
        ap += (recall - prev_recall) * tp / pp;
        prev_recall = recall;
    }
    ap
}

/// Random connected graph: a random spanning tree plus extra edges.
/// Weights are drawn from `weight`.
pub fn random_connected_graph(
    rng: &mut ChaCha20Rng,
    n: usize,
    extra_edges: usize,
    mut weight: impl FnMut(&mut ChaCha20Rng) -> f64,
) -> (Graph, Vec<(usize, usize, f64)>) {
    let mut g = Graph::new(n);
    let mut edges = Vec::new();
    for v in 1..n {
        let u = rng.random_range(0..v);
        let w = weight(rng);
        g.add_edge(u, v, w).unwrap();
        edges.push((u, v, w));
    }
    for _ in 0..extra_edges {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        let w = weight(rng);
        g.add_edge(u, v, w).unwrap();
        edges.push((u, v, w));
    }
    (g, edges)
}

pub fn floyd_warshall(n: usize, edges: &[(usize, usize, f64)]) -> Vec<Vec<f64>> {
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for &(u, v, w) in edges {
        if u != v && w < d[u][v] {
            d[u][v] = w;
            d[v][u] = w;
        }
    }
    for m in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][m] + d[m][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

/// Weights on a dyadic grid (multiples of 1/64 up to 16), so every path sum
/// is exact in floating point regardless of the order of additions.
pub fn dyadic_weight(rng: &mut ChaCha20Rng) -> f64 {
    rng.random_range(1..=1024u32) as f64 / 64.0
}
