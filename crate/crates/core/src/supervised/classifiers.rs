//! Supervised baselines. Samples are questions, features are individuals:
//! inputs are `k x n` views whose columns are the questions.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{CrowdError, Result};
use crate::numerics::solve_spd;

pub const LOGISTIC_MAX_ITERATIONS: usize = 100;
pub const LOGISTIC_TOLERANCE: f64 = 1e-8;
pub const LOGISTIC_RIDGE: f64 = 1e-8;
pub const LDA_RIDGE: f64 = 1e-6;
const OLS_JITTER: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classifier {
    Ols,
    Logistic,
    Lda,
    Knn(usize),
}

impl Classifier {
    /// ols, logistic, lda and knn at its default of 10 neighbors.
    pub fn defaults() -> Vec<Classifier> {
        vec![
            Classifier::Ols,
            Classifier::Logistic,
            Classifier::Lda,
            Classifier::Knn(10),
        ]
    }

    pub fn name(&self) -> String {
        match self {
            Classifier::Ols => "ols".into(),
            Classifier::Logistic => "logistic".into(),
            Classifier::Lda => "lda".into(),
            Classifier::Knn(k) => format!("knn({k})"),
        }
    }
}

impl fmt::Display for Classifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Parses `ols`, `logistic`, `lda`, `knn`, `knn:15` or `knn(15)`.
impl FromStr for Classifier {
    type Err = CrowdError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let (name, arg) = match s.split_once([':', '(']) {
            Some((n, a)) => (n.to_string(), Some(a.trim_end_matches(')').to_string())),
            None => (s.clone(), None),
        };
        match (name.as_str(), arg) {
            ("ols", None) => Ok(Classifier::Ols),
            ("logistic", None) => Ok(Classifier::Logistic),
            ("lda", None) => Ok(Classifier::Lda),
            ("knn", None) => Ok(Classifier::Knn(10)),
            ("knn", Some(k)) => k
                .parse()
                .map(Classifier::Knn)
                .map_err(|_| CrowdError::InvalidArgument(format!("bad neighbor count in {s:?}"))),
            _ => Err(CrowdError::InvalidArgument(format!(
                "unknown classifier {s:?}; expected ols, logistic, lda or knn[:K]"
            ))),
        }
    }
}

fn with_intercept(x: ArrayView2<'_, f64>) -> Array2<f64> {
    // rows = samples, first column = 1
    let (k, n) = x.dim();
    let mut out = Array2::ones((n, k + 1));
    out.slice_mut(ndarray::s![.., 1..]).assign(&x.t());
    out
}

fn labels_as_f64(y: &[bool]) -> Array1<f64> {
    y.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect()
}

fn add_ridge(a: &mut Array2<f64>, ridge: f64) {
    for i in 0..a.nrows() {
        a[[i, i]] += ridge;
    }
}

fn numerical(who: &str, e: CrowdError) -> CrowdError {
    CrowdError::Numerical(format!("{who}: {e}"))
}

fn check_inputs(
    x_train: ArrayView2<'_, f64>,
    y_train: &[bool],
    x_test: ArrayView2<'_, f64>,
) -> Result<()> {
    if x_train.ncols() != y_train.len() {
        return Err(CrowdError::Contract(format!(
            "{} training questions but {} labels",
            x_train.ncols(),
            y_train.len()
        )));
    }
    if x_train.nrows() != x_test.nrows() {
        return Err(CrowdError::Contract(format!(
            "train has {} features, test has {}",
            x_train.nrows(),
            x_test.nrows()
        )));
    }
    Ok(())
}

pub fn fit_predict(
    classifier: Classifier,
    x_train: ArrayView2<'_, f64>,
    y_train: &[bool],
    x_test: ArrayView2<'_, f64>,
) -> Result<Vec<f64>> {
    check_inputs(x_train, y_train, x_test)?;
    match classifier {
        Classifier::Ols => ols(x_train, y_train, x_test),
        Classifier::Logistic => logistic(x_train, y_train, x_test),
        Classifier::Lda => lda(x_train, y_train, x_test),
        Classifier::Knn(k) => knn(x_train, y_train, x_test, k),
    }
}

fn ols(x_train: ArrayView2<'_, f64>, y: &[bool], x_test: ArrayView2<'_, f64>) -> Result<Vec<f64>> {
    let x = with_intercept(x_train);
    let y = labels_as_f64(y);
    let mut xtx = x.t().dot(&x);
    let xty = x.t().dot(&y);
    let beta = match solve_spd(xtx.view(), xty.view()) {
        Ok(b) => b,
        Err(CrowdError::Singular { .. }) => {
            let ridge = OLS_JITTER * xtx.diag().sum() / xtx.nrows() as f64;
            add_ridge(&mut xtx, ridge);
            solve_spd(xtx.view(), xty.view()).map_err(|e| numerical("ols", e))?
        }
        Err(e) => return Err(e),
    };
    Ok(with_intercept(x_test).dot(&beta).to_vec())
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// Iteratively reweighted least squares. On separable data the weights grow
/// without bound; the iteration cap stops them while the ranking is already
/// perfect.
fn logistic(
    x_train: ArrayView2<'_, f64>,
    y: &[bool],
    x_test: ArrayView2<'_, f64>,
) -> Result<Vec<f64>> {
    let x = with_intercept(x_train);
    let y = labels_as_f64(y);
    let p = x.ncols();
    let mut beta = Array1::<f64>::zeros(p);
    for _ in 0..LOGISTIC_MAX_ITERATIONS {
        let eta = x.dot(&beta);
        let mu = eta.mapv(sigmoid);
        let w = mu.mapv(|m| m * (1.0 - m));
        let xw = &x * &w.clone().insert_axis(Axis(1));
        let mut h = x.t().dot(&xw);
        add_ridge(&mut h, LOGISTIC_RIDGE);
        let g = x.t().dot(&(&y - &mu));
        let step = solve_spd(h.view(), g.view()).map_err(|e| numerical("logistic", e))?;
        let next = &beta + &step;
        if next.iter().any(|v| !v.is_finite()) {
            break;
        }
        beta = next;
        if step.iter().fold(0.0f64, |m, s| m.max(s.abs())) < LOGISTIC_TOLERANCE {
            break;
        }
    }
    Ok(with_intercept(x_test).dot(&beta).to_vec())
}

/// Weight vector of linear discriminant analysis:
/// `(S + r I)^{-1} (mu_1 - mu_0)` with `S` the pooled within-class covariance.
pub fn lda_weights(x_train: ArrayView2<'_, f64>, y: &[bool]) -> Result<Array1<f64>> {
    let k = x_train.nrows();
    let n = x_train.ncols();
    let (pos, neg): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| y[i]);
    if pos.is_empty() || neg.is_empty() || n < 3 {
        return Err(CrowdError::ClassPresence {
            positives: pos.len(),
            negatives: neg.len(),
        });
    }
    let class_mean = |idx: &[usize]| {
        x_train
            .select(Axis(1), idx)
            .mean_axis(Axis(1))
            .expect("non-empty class")
    };
    let m1 = class_mean(&pos);
    let m0 = class_mean(&neg);
    let mut s = Array2::<f64>::zeros((k, k));
    for i in 0..n {
        let d = &x_train.column(i) - if y[i] { &m1 } else { &m0 };
        for a in 0..k {
            for b in 0..k {
                s[[a, b]] += d[a] * d[b];
            }
        }
    }
    s /= (n - 2) as f64;
    let trace = s.diag().sum();
    let ridge = if trace > 0.0 {
        LDA_RIDGE * trace / k as f64
    } else {
        LDA_RIDGE
    };
    add_ridge(&mut s, ridge);
    solve_spd(s.view(), (&m1 - &m0).view()).map_err(|e| numerical("lda", e))
}

fn lda(x_train: ArrayView2<'_, f64>, y: &[bool], x_test: ArrayView2<'_, f64>) -> Result<Vec<f64>> {
    let w = lda_weights(x_train, y)?;
    Ok(x_test.t().dot(&w).to_vec())
}

fn knn(
    x_train: ArrayView2<'_, f64>,
    y: &[bool],
    x_test: ArrayView2<'_, f64>,
    k: usize,
) -> Result<Vec<f64>> {
    let n = x_train.ncols();
    if k == 0 || k > n {
        return Err(CrowdError::InvalidArgument(format!(
            "knn needs 1..={n} neighbors, got {k}"
        )));
    }
    Ok(x_test
        .columns()
        .into_iter()
        .map(|q| {
            let mut d: Vec<(f64, usize)> = (0..n)
                .map(|i| {
                    let diff = &x_train.column(i) - &q;
                    (diff.dot(&diff), i)
                })
                .collect();
            d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            d[..k].iter().filter(|&&(_, i)| y[i]).count() as f64 / k as f64
        })
        .collect())
}
