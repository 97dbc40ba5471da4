//! Supervised baselines and the repeated train/test protocol that compares
//! them with crowd consensus. Crowd methods never see labels: they aggregate
//! all questions once and are only evaluated on each test split.

mod classifiers;

pub use classifiers::{fit_predict, lda_weights, Classifier};

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;

use crate::aggregators::{consensus, AggregatorSpec};
use crate::error::{CrowdError, Result};
use crate::metrics::{evaluate_scores_two_sided, median};
use crate::preprocess::{normalize, NormalizationSpec};
use crate::seed::{mix_seed, rng_from_seed, streams};
use crate::types::{GroundTruth, ResponseMatrix, ScoreVector};

pub const TRAIN_FRACTIONS: [f64; 7] = [0.10, 0.20, 0.25, 0.40, 0.60, 0.80, 0.90];
pub const DEFAULT_REPEATS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub repeats: usize,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(train_fraction: f64, repeats: usize, seed: u64) -> Result<Self> {
        if !TRAIN_FRACTIONS
            .iter()
            .any(|&f| (f - train_fraction).abs() < 1e-12)
        {
            return Err(CrowdError::InvalidArgument(format!(
                "train fraction {train_fraction} is not one of {TRAIN_FRACTIONS:?}"
            )));
        }
        if repeats == 0 {
            return Err(CrowdError::InvalidArgument(
                "repeats must be at least 1".into(),
            ));
        }
        Ok(Self {
            train_fraction,
            repeats,
            seed,
        })
    }
}

/// Per-class training counts. The total is `round(f * n)`; classes get the
/// floor of their share and leftover slots go by largest remainder, ties to
/// the larger class and then to the negative class.
pub fn stratified_train_counts(
    positives: usize,
    negatives: usize,
    fraction: f64,
) -> (usize, usize) {
    let n = positives + negatives;
    let total = (fraction * n as f64).round() as usize;
    let share_pos = fraction * positives as f64;
    let share_neg = fraction * negatives as f64;
    let mut pos = share_pos.floor() as usize;
    let mut neg = share_neg.floor() as usize;
    let rem_pos = share_pos - pos as f64;
    let rem_neg = share_neg - neg as f64;
    let pos_first = rem_pos > rem_neg || (rem_pos == rem_neg && positives > negatives);
    let mut order = if pos_first {
        [true, false]
    } else {
        [false, true]
    }
    .into_iter()
    .cycle();
    while pos + neg < total {
        if order.next().expect("cycle") {
            pos += 1;
        } else {
            neg += 1;
        }
    }
    (pos.min(positives), neg.min(negatives))
}

/// Train and test question indices (both ascending) of repeat
/// `repeat_index`. The training set must hold both classes and more
/// questions than `n_individuals`, and the test set must not be empty.
pub fn stratified_shuffle_split(
    truth: &GroundTruth,
    spec: &SplitSpec,
    repeat_index: usize,
    n_individuals: usize,
) -> Result<(Vec<usize>, Vec<usize>)> {
    let (mut pos, mut neg): (Vec<usize>, Vec<usize>) =
        (0..truth.len()).partition(|&i| truth.labels[i]);
    let (n_pos, n_neg) = stratified_train_counts(pos.len(), neg.len(), spec.train_fraction);
    let infeasible = |why: String| Err(CrowdError::SplitInfeasible(why));
    if n_pos == 0 || n_neg == 0 {
        return infeasible(format!(
            "training set would hold {n_pos} positives and {n_neg} negatives"
        ));
    }
    if n_pos + n_neg <= n_individuals {
        return infeasible(format!(
            "training set of {} questions is not larger than the {n_individuals} individuals",
            n_pos + n_neg
        ));
    }
    if n_pos + n_neg >= truth.len() {
        return infeasible("test set would be empty".into());
    }
    let mut rng = rng_from_seed(mix_seed(
        mix_seed(spec.seed, streams::SPLIT),
        repeat_index as u64,
    ));
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);
    let mut train: Vec<usize> = pos[..n_pos].iter().chain(&neg[..n_neg]).copied().collect();
    let mut test: Vec<usize> = pos[n_pos..].iter().chain(&neg[n_neg..]).copied().collect();
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodFamily {
    Crowd,
    Supervised,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvRow {
    pub repeat: usize,
    pub family: MethodFamily,
    pub method: String,
    pub auroc: Option<f64>,
    pub aupr: Option<f64>,
    pub excluded: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvSummary {
    pub family: MethodFamily,
    pub method: String,
    pub evaluated: usize,
    pub median_auroc: Option<f64>,
    pub median_aupr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvResult {
    pub rows: Vec<CvRow>,
    /// Repeats whose split was infeasible, with the reason.
    pub skipped: Vec<(usize, String)>,
    pub summaries: Vec<CvSummary>,
}

impl CvResult {
    /// Best median of each family: `(crowd, supervised)`.
    pub fn best_medians(
        &self,
        pick: impl Fn(&CvSummary) -> Option<f64>,
    ) -> (Option<f64>, Option<f64>) {
        let best = |family| {
            self.summaries
                .iter()
                .filter(|s| s.family == family)
                .filter_map(&pick)
                .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))))
        };
        (best(MethodFamily::Crowd), best(MethodFamily::Supervised))
    }
}

fn evaluate_subset(
    scores: &[f64],
    test: &[usize],
    truth: &GroundTruth,
    tag: &str,
) -> Result<(f64, f64)> {
    let sub: Vec<f64> = test.iter().map(|&i| scores[i]).collect();
    let report = evaluate_scores_two_sided(&sub, &truth.select(test), tag)?;
    Ok((report.auroc, report.aupr))
}

fn row(repeat: usize, family: MethodFamily, method: String, outcome: Result<(f64, f64)>) -> CvRow {
    let (auroc, aupr, excluded) = match outcome {
        Ok((a, p)) => (Some(a), Some(p), None),
        Err(e) => (None, None, Some(e.to_string())),
    };
    CvRow {
        repeat,
        family,
        method,
        auroc,
        aupr,
        excluded,
    }
}

/// Repeated stratified train/test comparison of crowd methods against
/// supervised classifiers on one dataset. `raw` holds unnormalized responses;
/// classifiers see the normalized matrix.
pub fn cv_compare(
    raw: &ResponseMatrix,
    truth: &GroundTruth,
    crowd_methods: &[AggregatorSpec],
    classifiers: &[Classifier],
    spec: &SplitSpec,
) -> Result<CvResult> {
    if truth.len() != raw.n_questions() {
        return Err(CrowdError::InvalidArgument(format!(
            "truth has {} labels for {} questions",
            truth.len(),
            raw.n_questions()
        )));
    }
    truth.require_both_classes()?;
    let features = normalize(raw, NormalizationSpec::for_kind(raw.kind()))?.matrix;
    let crowd: Vec<(String, Result<ScoreVector>)> = crowd_methods
        .iter()
        .map(|m| (m.tag(), consensus(raw, m)))
        .collect();

    let per_repeat: Vec<std::result::Result<Vec<CvRow>, (usize, String)>> = (0..spec.repeats)
        .into_par_iter()
        .map(|r| {
            let (train, test) = stratified_shuffle_split(truth, spec, r, raw.n_individuals())
                .map_err(|e| (r, e.to_string()))?;
            let mut rows = Vec::with_capacity(crowd.len() + classifiers.len());
            for (tag, scores) in &crowd {
                let outcome = scores
                    .as_ref()
                    .map_err(Clone::clone)
                    .and_then(|s| evaluate_subset(&s.scores, &test, truth, tag));
                rows.push(row(r, MethodFamily::Crowd, tag.clone(), outcome));
            }
            let x = features.values();
            let x_train = x.select(ndarray::Axis(1), &train);
            let x_test = x.select(ndarray::Axis(1), &test);
            let y_train: Vec<bool> = train.iter().map(|&i| truth.labels[i]).collect();
            let test_truth = truth.select(&test);
            for c in classifiers {
                let outcome =
                    fit_predict(*c, x_train.view(), &y_train, x_test.view()).and_then(|s| {
                        let rep = evaluate_scores_two_sided(&s, &test_truth, &c.name())?;
                        Ok((rep.auroc, rep.aupr))
                    });
                rows.push(row(r, MethodFamily::Supervised, c.name(), outcome));
            }
            Ok(rows)
        })
        .collect();

    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for r in per_repeat {
        match r {
            Ok(v) => rows.extend(v),
            Err(s) => skipped.push(s),
        }
    }
    let methods = crowd
        .iter()
        .map(|(t, _)| (MethodFamily::Crowd, t.clone()))
        .chain(
            classifiers
                .iter()
                .map(|c| (MethodFamily::Supervised, c.name())),
        );
    let summaries = methods
        .map(|(family, method)| {
            let mine: Vec<&CvRow> = rows
                .iter()
                .filter(|r| r.family == family && r.method == method)
                .collect();
            let aurocs: Vec<f64> = mine.iter().filter_map(|r| r.auroc).collect();
            let auprs: Vec<f64> = mine.iter().filter_map(|r| r.aupr).collect();
            CvSummary {
                family,
                method,
                evaluated: aurocs.len(),
                median_auroc: median(&aurocs),
                median_aupr: median(&auprs),
            }
        })
        .collect();
    Ok(CvResult {
        rows,
        skipped,
        summaries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregators::Method;
    use crate::types::{default_ids, Kind};
    use ndarray::Array2;

    #[test]
    fn largest_remainder_counts() {
        // 7.5 and 17.5 tie on remainder; the larger class takes the slot
        assert_eq!(stratified_train_counts(30, 70, 0.25), (7, 18));
        assert_eq!(stratified_train_counts(5, 5, 0.9), (4, 5));
        assert_eq!(stratified_train_counts(3, 7, 0.9), (3, 6));
        assert_eq!(stratified_train_counts(33, 67, 0.1), (3, 7));
    }

    #[test]
    fn split_partitions_and_is_reproducible() {
        let truth = GroundTruth::new((0..100).map(|i| i % 10 < 3).collect());
        let spec = SplitSpec::new(0.25, 10, 4).unwrap();
        let (train, test) = stratified_shuffle_split(&truth, &spec, 3, 8).unwrap();
        assert_eq!(train.len(), 25);
        assert_eq!(train.iter().filter(|&&i| truth.labels[i]).count(), 7);
        let mut all: Vec<usize> = train.iter().chain(&test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..100).collect::<Vec<_>>());
        assert_eq!(
            stratified_shuffle_split(&truth, &spec, 3, 8).unwrap(),
            (train.clone(), test)
        );
        assert_ne!(
            stratified_shuffle_split(&truth, &spec, 4, 8).unwrap().0,
            train
        );
    }

    #[test]
    fn boundary_and_infeasible_splits() {
        let truth = GroundTruth::from_u8(&[1, 0, 1, 0, 0, 1, 0, 0, 1, 0]);
        let spec = SplitSpec::new(0.9, 1, 0).unwrap();
        let (train, test) = stratified_shuffle_split(&truth, &spec, 0, 3).unwrap();
        assert_eq!((train.len(), test.len()), (9, 1));
        // 9 training questions cannot outnumber 9 individuals
        assert!(matches!(
            stratified_shuffle_split(&truth, &spec, 0, 9),
            Err(CrowdError::SplitInfeasible(_))
        ));
        let spec = SplitSpec::new(0.1, 1, 0).unwrap();
        assert!(matches!(
            stratified_shuffle_split(&truth, &spec, 0, 0),
            Err(CrowdError::SplitInfeasible(_))
        ));
        assert!(SplitSpec::new(0.3, 1, 0).is_err());
    }

    fn oracle_dataset() -> (ResponseMatrix, GroundTruth) {
        // individual 1 answers with the label itself, the rest is filler
        let labels: Vec<bool> = (0..40).map(|i| (i * 7) % 5 < 2).collect();
        let x = Array2::from_shape_fn((3, 40), |(j, i)| match j {
            0 => {
                if labels[i] {
                    1.0
                } else {
                    0.0
                }
            }
            1 => ((i * 13) % 11) as f64,
            _ => ((i * 5) % 7) as f64,
        });
        let m = ResponseMatrix::from_parts(
            x,
            default_ids("I", 3),
            default_ids("Q", 40),
            Kind::Continuous,
        );
        (m, GroundTruth::new(labels))
    }

    #[test]
    fn cv_rows_and_skips() {
        let (m, truth) = oracle_dataset();
        let spec = SplitSpec::new(0.4, 5, 1).unwrap();
        let res = cv_compare(
            &m,
            &truth,
            &[AggregatorSpec::new(Method::Mean)],
            &[Classifier::Ols],
            &spec,
        )
        .unwrap();
        assert_eq!(res.rows.len(), 10);
        assert!(res.skipped.is_empty());
        let ols: Vec<f64> = res
            .rows
            .iter()
            .filter(|r| r.method == "ols")
            .filter_map(|r| r.auroc)
            .collect();
        assert!(ols.iter().all(|&a| a == 1.0));
        assert!(res.rows.iter().filter_map(|r| r.auroc).all(|a| a >= 0.5));
        let (crowd, sup) = res.best_medians(|s| s.median_auroc);
        assert!(crowd.is_some() && sup == Some(1.0));

        // 10 questions at 10% leave one training question: every repeat is skipped
        let idx: Vec<usize> = (0..10).collect();
        let spec = SplitSpec::new(0.1, 3, 1).unwrap();
        let res = cv_compare(
            &m.select_questions(&idx),
            &truth.select(&idx),
            &[AggregatorSpec::new(Method::Mean)],
            &[Classifier::Ols],
            &spec,
        )
        .unwrap();
        assert!(res.rows.is_empty());
        assert_eq!(
            res.skipped.iter().map(|s| s.0).collect::<Vec<_>>(),
            vec![0, 1, 2]
        );
    }

    #[test]
    fn crowd_scores_ignore_the_split() {
        let (m, truth) = oracle_dataset();
        let spec = SplitSpec::new(0.25, 4, 9).unwrap();
        let direct = consensus(&m, &AggregatorSpec::new(Method::Mean)).unwrap();
        let res = cv_compare(&m, &truth, &[AggregatorSpec::new(Method::Mean)], &[], &spec).unwrap();
        for r in 0..4 {
            let (_, test) = stratified_shuffle_split(&truth, &spec, r, 3).unwrap();
            let expect = evaluate_subset(&direct.scores, &test, &truth, "mean").unwrap();
            let got = res.rows.iter().find(|row| row.repeat == r).unwrap();
            assert_eq!((got.auroc.unwrap(), got.aupr.unwrap()), expect);
        }
    }
}
