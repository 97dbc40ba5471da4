use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{CrowdError, Result};

/// Lower Cholesky factor of a symmetric positive definite matrix. A pivot at
/// or below `n * eps * max(diag(A))` is reported as singular.
pub fn cholesky(a: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    let (n, c) = a.dim();
    if n != c {
        return Err(CrowdError::Contract(format!(
            "matrix is {n}x{c}, not square"
        )));
    }
    let scale = a.diag().iter().fold(0.0f64, |m, &d| m.max(d));
    let tol = n as f64 * f64::EPSILON * scale;
    let mut l = Array2::<f64>::zeros((n, n));
    for j in 0..n {
        let mut diag = a[[j, j]];
        for k in 0..j {
            diag -= l[[j, k]] * l[[j, k]];
        }
        if !(diag > tol) {
            return Err(CrowdError::Singular {
                index: j,
                value: diag,
            });
        }
        let ljj = diag.sqrt();
        l[[j, j]] = ljj;
        for i in (j + 1)..n {
            let mut s = a[[i, j]];
            for k in 0..j {
                s -= l[[i, k]] * l[[j, k]];
            }
            l[[i, j]] = s / ljj;
        }
    }
    Ok(l)
}

/// Solves `A x = b` for symmetric positive definite `A`. Callers add any
/// ridge jitter before calling.
pub fn solve_spd(a: ArrayView2<'_, f64>, b: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
    let n = a.nrows();
    if b.len() != n {
        return Err(CrowdError::Contract(format!(
            "right-hand side has length {}, matrix is {n}x{n}",
            b.len()
        )));
    }
    let l = cholesky(a)?;
    let mut y = Array1::<f64>::zeros(n);
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[[i, k]] * y[k];
        }
        y[i] = s / l[[i, i]];
    }
    let mut x = Array1::<f64>::zeros(n);
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[[k, i]] * x[k];
        }
        x[i] = s / l[[i, i]];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn identity_returns_rhs() {
        let b = array![3.0, -1.5, 0.25];
        assert_eq!(
            solve_spd(Array2::<f64>::eye(3).view(), b.view()).unwrap(),
            b
        );
    }

    #[test]
    fn diagonal_system() {
        let x = solve_spd(
            array![[2.0, 0.0], [0.0, 4.0]].view(),
            array![2.0, 8.0].view(),
        )
        .unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn singular_names_pivot() {
        let a = array![[1.0, 1.0], [1.0, 1.0]];
        match solve_spd(a.view(), array![1.0, 1.0].view()) {
            Err(CrowdError::Singular { index, .. }) => assert_eq!(index, 1),
            other => panic!("expected singular error, got {other:?}"),
        }
    }
}
