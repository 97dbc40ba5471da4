//! Symmetric eigendecomposition by cyclic Jacobi rotations.

use ndarray::{Array2, ArrayView2};

use crate::error::{CrowdError, Result};

/// Eigenpairs in selection order (descending for [`sym_eig_top`], ascending
/// for [`sym_eig_bottom`]). `vectors` holds one unit eigenvector per column.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenResult {
    pub values: Vec<f64>,
    pub vectors: Array2<f64>,
}

impl EigenResult {
    pub fn vector(&self, idx: usize) -> Vec<f64> {
        self.vectors.column(idx).to_vec()
    }
}

const MAX_SWEEPS: usize = 100;

pub fn check_symmetric(a: ArrayView2<'_, f64>) -> Result<()> {
    let (r, c) = a.dim();
    if r != c {
        return Err(CrowdError::Contract(format!(
            "matrix is {r}x{c}, not square"
        )));
    }
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for i in 0..r {
        for j in (i + 1)..r {
            let d = (a[[i, j]] - a[[j, i]]).abs();
            if !(d <= 1e-10 * scale) {
                return Err(CrowdError::Contract(format!(
                    "matrix is not symmetric at ({i}, {j}): {} vs {}",
                    a[[i, j]],
                    a[[j, i]]
                )));
            }
        }
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(CrowdError::Contract("matrix has non-finite entries".into()));
    }
    Ok(())
}

/// Full decomposition, eigenvalues ascending. Only the upper triangle of `a`
/// is read after the symmetry check.
pub fn sym_eig_full(a: ArrayView2<'_, f64>) -> Result<EigenResult> {
    check_symmetric(a)?;
    let n = a.nrows();
    let mut m: Vec<f64> = a.iter().copied().collect();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let mut d: Vec<f64> = (0..n).map(|i| m[i * n + i]).collect();
    let mut b = d.clone();
    let mut z = vec![0.0; n];

    let mut converged = n <= 1;
    for sweep in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| m[p * n + q].abs())
            .sum();
        if off == 0.0 {
            converged = true;
            break;
        }
        let thresh = if sweep < 3 {
            0.2 * off / (n * n) as f64
        } else {
            0.0
        };
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                let g = 100.0 * apq.abs();
                if sweep > 3 && d[p].abs() + g == d[p].abs() && d[q].abs() + g == d[q].abs() {
                    m[p * n + q] = 0.0;
                } else if apq.abs() > thresh {
                    let h = d[q] - d[p];
                    let t = if h.abs() + g == h.abs() {
                        apq / h
                    } else {
                        let theta = 0.5 * h / apq;
                        let t = 1.0 / (theta.abs() + (1.0 + theta * theta).sqrt());
                        if theta < 0.0 {
                            -t
                        } else {
                            t
                        }
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    let tau = s / (1.0 + c);
                    let h = t * apq;
                    z[p] -= h;
                    z[q] += h;
                    d[p] -= h;
                    d[q] += h;
                    m[p * n + q] = 0.0;
                    let rot = |m: &mut [f64], i: usize, j: usize, k: usize, l: usize| {
                        let g = m[i * n + j];
                        let h = m[k * n + l];
                        m[i * n + j] = g - s * (h + g * tau);
                        m[k * n + l] = h + s * (g - h * tau);
                    };
                    for j in 0..p {
                        rot(&mut m, j, p, j, q);
                    }
                    for j in (p + 1)..q {
                        rot(&mut m, p, j, j, q);
                    }
                    // row segments beyond q are contiguous
                    let (head, tail) = m.split_at_mut(q * n);
                    let mp = &mut head[p * n + q + 1..(p + 1) * n];
                    let mq = &mut tail[q + 1..n];
                    for (x, y) in mp.iter_mut().zip(mq.iter_mut()) {
                        let (g, h) = (*x, *y);
                        *x = g - s * (h + g * tau);
                        *y = h + s * (g - h * tau);
                    }
                    // eigenvectors are stored as rows, so this is contiguous
                    let (head, tail) = v.split_at_mut(q * n);
                    let vp = &mut head[p * n..(p + 1) * n];
                    let vq = &mut tail[..n];
                    for (x, y) in vp.iter_mut().zip(vq.iter_mut()) {
                        let (g, h) = (*x, *y);
                        *x = g - s * (h + g * tau);
                        *y = h + s * (g - h * tau);
                    }
                }
            }
        }
        for p in 0..n {
            b[p] += z[p];
            d[p] = b[p];
            z[p] = 0.0;
        }
    }
    if !converged {
        return Err(CrowdError::Numerical(format!(
            "Jacobi eigensolver did not converge in {MAX_SWEEPS} sweeps"
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]).then(i.cmp(&j)));
    let mut vectors = Array2::zeros((n, n));
    for (col, &src) in order.iter().enumerate() {
        let mut vec = v[src * n..(src + 1) * n].to_vec();
        orient(&mut vec);
        for (r, x) in vec.into_iter().enumerate() {
            vectors[[r, col]] = x;
        }
    }
    Ok(EigenResult {
        values: order.iter().map(|&i| d[i]).collect(),
        vectors,
    })
}

/// Sign convention: the largest-magnitude component (first on ties) is
/// positive. Returns whether the vector was negated.
pub fn orient(v: &mut [f64]) -> bool {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|&x| x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
        true
    } else {
        false
    }
}

fn check_count(n: usize, m: usize) -> Result<()> {
    if m == 0 || m > n {
        return Err(CrowdError::Contract(format!(
            "requested {m} eigenpairs from a {n}x{n} matrix"
        )));
    }
    Ok(())
}

/// The `m` largest eigenpairs, eigenvalues descending.
pub fn sym_eig_top(a: ArrayView2<'_, f64>, m: usize) -> Result<EigenResult> {
    check_count(a.nrows(), m)?;
    let full = sym_eig_full(a)?;
    let n = full.values.len();
    let idx: Vec<usize> = (0..m).map(|i| n - 1 - i).collect();
    Ok(EigenResult {
        values: idx.iter().map(|&i| full.values[i]).collect(),
        vectors: full.vectors.select(ndarray::Axis(1), &idx),
    })
}

/// The `m` smallest eigenpairs, eigenvalues ascending.
pub fn sym_eig_bottom(a: ArrayView2<'_, f64>, m: usize) -> Result<EigenResult> {
    check_count(a.nrows(), m)?;
    let full = sym_eig_full(a)?;
    let idx: Vec<usize> = (0..m).collect();
    Ok(EigenResult {
        values: full.values[..m].to_vec(),
        vectors: full.vectors.select(ndarray::Axis(1), &idx),
    })
}
