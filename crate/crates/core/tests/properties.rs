//! Invariants checked over generated inputs.

mod common;

use crowdwise::aggregators::{consensus, mds_scores, pca_scores, AggregatorSpec, Method};
use crowdwise::io::{read_responses, write_responses};
use crowdwise::metrics::{auroc, evaluate_scores_two_sided, roc_curve};
use crowdwise::numerics::sym_eig_top;
use crowdwise::preprocess::{perfect_binarize, rank_transform, standardize};
use crowdwise::supervised::{stratified_shuffle_split, SplitSpec, TRAIN_FRACTIONS};
use crowdwise::types::{validate_dataset, GroundTruth, Kind, ResponseMatrix};
use ndarray::Array2;
use proptest::prelude::*;

use common::{max_diff_up_to_sign, ranks};

fn matrix(
    k: std::ops::Range<usize>,
    n: std::ops::Range<usize>,
) -> impl Strategy<Value = Array2<f64>> {
    (k, n).prop_flat_map(|(k, n)| {
        proptest::collection::vec(-100.0f64..100.0, k * n)
            .prop_map(move |v| Array2::from_shape_vec((k, n), v).unwrap())
    })
}

fn continuous(values: Array2<f64>) -> ResponseMatrix {
    ResponseMatrix::with_default_ids(values, Kind::Continuous).unwrap()
}

/// Scores on a coarse grid (so ties are common) with labels of both classes.
fn scored_labels() -> impl Strategy<Value = (Vec<f64>, Vec<bool>)> {
    (2usize..60).prop_flat_map(|n| {
        (
            proptest::collection::vec((0i32..10).prop_map(f64::from), n),
            proptest::collection::vec(any::<bool>(), n),
        )
            .prop_filter("both classes", |(_, l)| {
                l.iter().any(|&x| x) && l.iter().any(|&x| !x)
            })
    })
}

fn non_constant_rows(m: &Array2<f64>) -> bool {
    m.rows().into_iter().all(|r| r.iter().any(|&v| v != r[0]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rank_transform_ignores_increasing_maps(values in matrix(2..6, 3..30)) {
        let a = rank_transform(&continuous(values.clone())).unwrap();
        let b = rank_transform(&continuous(values.mapv(|x| x * x * x + x))).unwrap();
        prop_assert_eq!(a.values(), b.values());
    }

    #[test]
    fn standardize_is_idempotent(values in matrix(2..6, 3..30)) {
        prop_assume!(non_constant_rows(&values));
        let (once, _) = standardize(&continuous(values));
        let (twice, _) = standardize(&once);
        for (x, y) in once.values().iter().zip(twice.values()) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn perfect_binarize_marks_exactly_the_positive_count(
        values in matrix(2..6, 3..30),
        seed in any::<u64>(),
        frac in 0.05f64..0.95,
    ) {
        let m = continuous(values.mapv(|v| v.round()));
        let n = m.n_questions();
        let positives = ((n as f64 * frac).round() as usize).clamp(1, n - 1);
        let truth = GroundTruth::new((0..n).map(|i| i < positives).collect());
        let b = perfect_binarize(&m, &truth, seed).unwrap();
        prop_assert_eq!(b.kind(), Kind::Binary);
        for row in b.values().rows() {
            prop_assert_eq!(row.sum() as usize, positives);
        }
    }

    #[test]
    fn perfect_binarize_without_ties_ignores_the_seed(
        values in matrix(2..6, 3..30),
        s1 in any::<u64>(),
        s2 in any::<u64>(),
    ) {
        // continuous draws have no ties with probability one
        let m = continuous(values);
        let n = m.n_questions();
        let truth = GroundTruth::new((0..n).map(|i| i % 3 == 0).collect());
        let a = perfect_binarize(&m, &truth, s1).unwrap();
        let b = perfect_binarize(&m, &truth, s2).unwrap();
        prop_assert_eq!(a.values(), b.values());
    }

    #[test]
    fn eigen_shift_moves_values_not_vectors(values in matrix(2..8, 2..3), c in -50.0f64..50.0) {
        let n = values.nrows();
        let a = Array2::from_shape_fn((n, n), |(i, j)| values[[i.min(j), 0]] * values[[i.max(j), 0]] + if i == j { values[[i, 0]] } else { 0.0 });
        let b = &a + &(Array2::<f64>::eye(n) * c);
        let ea = sym_eig_top(a.view(), n).unwrap();
        let eb = sym_eig_top(b.view(), n).unwrap();
        let scale = ea.values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for (x, y) in ea.values.iter().zip(&eb.values) {
            prop_assert!((x + c - y).abs() <= 1e-10 * (scale + c.abs()));
        }
        // vectors are compared only where the spectrum is well separated
        let gaps_ok = ea.values.windows(2).all(|w| (w[0] - w[1]).abs() > 1e-3 * scale);
        if gaps_ok {
            for i in 0..n {
                prop_assert!(max_diff_up_to_sign(&ea.vector(i), &eb.vector(i)) <= 1e-8);
            }
        }
    }

    #[test]
    fn rescaling_an_individual_keeps_the_ranking(
        values in matrix(3..6, 5..30),
        row in 0usize..3,
        factor in 0.01f64..100.0,
        method in prop::sample::select(vec!["mean", "median", "pca", "fa", "mds"]),
    ) {
        prop_assume!(non_constant_rows(&values));
        let mut scaled = values.clone();
        scaled.row_mut(row).mapv_inplace(|v| v * factor);
        let spec: AggregatorSpec = method.parse().unwrap();
        let a = consensus(&continuous(values), &spec);
        let b = consensus(&continuous(scaled), &spec);
        match (a, b) {
            (Ok(a), Ok(b)) => prop_assert_eq!(ranks(&a.scores), ranks(&b.scores)),
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "one run failed: {:?} / {:?}", a.err(), b.err()),
        }
    }

    #[test]
    fn pca_ignores_flipping_one_standardized_row(values in matrix(3..6, 5..30), row in 0usize..3) {
        prop_assume!(non_constant_rows(&values));
        let (m, _) = standardize(&continuous(values));
        let mut flipped = m.values().clone();
        flipped.row_mut(row).mapv_inplace(|v| -v);
        let a = pca_scores(&m).unwrap().scores;
        let b = pca_scores(&m.with_values(flipped, Kind::Continuous)).unwrap().scores;
        let scale = a.iter().fold(1.0f64, |s, v| s.max(v.abs()));
        prop_assert!(max_diff_up_to_sign(&a, &b) <= 1e-8 * scale);
    }

    #[test]
    fn mds_equals_pca_up_to_sign(values in matrix(2..6, 4..30)) {
        prop_assume!(non_constant_rows(&values));
        let (m, _) = standardize(&continuous(values));
        let pca = pca_scores(&m).unwrap().scores;
        match mds_scores(&m) {
            Ok(mds) => prop_assert!(max_diff_up_to_sign(&mds.scores, &pca) <= 1e-8),
            Err(e) => prop_assert!(false, "mds failed: {e}"),
        }
    }

    #[test]
    fn aggregators_are_deterministic(values in matrix(3..6, 12..30)) {
        prop_assume!(non_constant_rows(&values));
        let m = continuous(values);
        for method in Method::ALL.into_iter().filter(|m| *m != Method::Sml) {
            let spec = if method.needs_neighbors() {
                AggregatorSpec::with_neighbors(method, 5)
            } else {
                AggregatorSpec::new(method)
            };
            let a = consensus(&m, &spec).map(|s| s.scores);
            let b = consensus(&m, &spec).map(|s| s.scores);
            prop_assert_eq!(format!("{a:?}"), format!("{b:?}"));
        }
    }

    #[test]
    fn auroc_ignores_increasing_maps((scores, labels) in scored_labels()) {
        let truth = GroundTruth::new(labels);
        let mapped: Vec<f64> = scores.iter().map(|s| s * s * s + s.exp()).collect();
        prop_assert_eq!(auroc(&scores, &truth).unwrap(), auroc(&mapped, &truth).unwrap());
    }

    #[test]
    fn auroc_of_negated_scores_is_complementary((scores, labels) in scored_labels()) {
        let truth = GroundTruth::new(labels);
        let neg: Vec<f64> = scores.iter().map(|s| -s).collect();
        prop_assert_eq!(auroc(&scores, &truth).unwrap() + auroc(&neg, &truth).unwrap(), 1.0);
    }

    #[test]
    fn two_sided_auroc_is_at_least_chance((scores, labels) in scored_labels()) {
        let truth = GroundTruth::new(labels);
        let r = evaluate_scores_two_sided(&scores, &truth, "p").unwrap();
        prop_assert!(r.auroc >= 0.5);
        prop_assert!(r.aupr > 0.0 && r.aupr <= 1.0);
    }

    #[test]
    fn roc_vertices_are_distinct((scores, labels) in scored_labels()) {
        let truth = GroundTruth::new(labels);
        let c = roc_curve(&scores, &truth).unwrap();
        let mut distinct: Vec<f64> = scores.clone();
        distinct.sort_by(f64::total_cmp);
        distinct.dedup();
        prop_assert_eq!(c.fpr.len(), distinct.len() + 1);
        for w in c.fpr.iter().zip(&c.tpr).collect::<Vec<_>>().windows(2) {
            prop_assert!(w[0] != w[1]);
        }
    }

    #[test]
    fn splits_partition_the_questions(
        labels in proptest::collection::vec(any::<bool>(), 8..80),
        fraction in prop::sample::select(TRAIN_FRACTIONS.to_vec()),
        seed in any::<u64>(),
        repeat in 0usize..50,
    ) {
        let truth = GroundTruth::new(labels);
        let spec = SplitSpec::new(fraction, 50, seed).unwrap();
        if let Ok((train, test)) = stratified_shuffle_split(&truth, &spec, repeat, 3) {
            let mut all: Vec<usize> = train.iter().chain(&test).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..truth.len()).collect::<Vec<_>>());
            prop_assert!(truth.select(&train).has_both_classes());
            prop_assert!(train.len() > 3 && !test.is_empty());
        }
    }

    #[test]
    fn responses_round_trip_exactly(values in matrix(2..5, 3..12), scale in -300i32..300) {
        let values = values.mapv(|v| v * 10f64.powi(scale / 10));
        let m = continuous(values);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        write_responses(&path, &m).unwrap();
        let back = read_responses(&path).unwrap();
        prop_assert_eq!(back.values(), m.values());
        prop_assert_eq!(back.question_ids(), m.question_ids());
        prop_assert_eq!(back.individual_ids(), m.individual_ids());
    }

    #[test]
    fn validation_is_pure(values in matrix(1..5, 1..8), labels in proptest::collection::vec(any::<bool>(), 1..8)) {
        let m = ResponseMatrix::from_parts(
            values.clone(),
            crowdwise::types::default_ids("I", values.nrows()),
            crowdwise::types::default_ids("Q", values.ncols()),
            Kind::Continuous,
        );
        let truth = GroundTruth::new(labels);
        let a = validate_dataset(&m, Some(&truth), None);
        let b = validate_dataset(&m, Some(&truth), None);
        prop_assert_eq!(a, b);
        prop_assert_eq!(m.values(), &values);
    }
}

/// Two-sided AUPR is not bounded below by prevalence: with positives packed
/// between two negatives, both orientations rank a negative first.
#[test]
fn two_sided_aupr_can_fall_below_prevalence() {
    let n = 14;
    let scores: Vec<f64> = (0..n).map(|i| i as f64).collect();
    let truth = GroundTruth::new((0..n).map(|i| i != 0 && i != n - 1).collect());
    let r = evaluate_scores_two_sided(&scores, &truth, "p").unwrap();
    let prevalence = 12.0 / 14.0;
    let expected = (1..=12).map(|j| j as f64 / (j + 1) as f64).sum::<f64>() / 12.0;
    assert!((r.aupr - expected).abs() < 1e-12);
    assert!(r.aupr < prevalence);
}
