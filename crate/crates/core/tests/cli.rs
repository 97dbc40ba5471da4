//! End-to-end runs of the `crowdwise` binary.

mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use crowdwise::io::write_responses;
use crowdwise::types::{Kind, ResponseMatrix};
use ndarray::Array2;
use rand::Rng;
use serde_json::Value;

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crowdwise"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = run_in(dir, args);
    assert!(
        out.status.success(),
        "`{}` failed: {}",
        args.join(" "),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn code(dir: &Path, args: &[&str]) -> (i32, String) {
    let out = run_in(dir, args);
    (
        out.status.code().unwrap(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

const BUNDLE: [&str; 4] = ["responses.csv", "truth.csv", "probs.csv", "alphas.csv"];

#[test]
fn simulate_writes_a_reproducible_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "simulate", "--preset", "SIM-BASE", "--seed", "7", "--out", "a",
        ],
    );
    ok(
        d,
        &[
            "simulate", "--preset", "SIM-BASE", "--seed", "7", "--out", "b",
        ],
    );
    let mut names: Vec<String> = fs::read_dir(d.join("a"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(
        names,
        [
            "alphas.csv",
            "manifest.json",
            "probs.csv",
            "responses.csv",
            "truth.csv"
        ]
    );
    for f in BUNDLE {
        assert_eq!(
            fs::read(d.join("a").join(f)).unwrap(),
            fs::read(d.join("b").join(f)).unwrap(),
            "{f}"
        );
    }
    let first = fs::read(d.join("a/manifest.json")).unwrap();
    ok(
        d,
        &[
            "simulate", "--preset", "SIM-BASE", "--seed", "7", "--out", "a",
        ],
    );
    assert_eq!(first, fs::read(d.join("a/manifest.json")).unwrap());

    let manifest: Value = serde_json::from_slice(&first).unwrap();
    assert_eq!(manifest["command"], "simulate");
    assert_eq!(manifest["seed"], 7);
    assert_eq!(manifest["parameters"]["k"], 10);
    assert_eq!(manifest["output_digests"].as_object().unwrap().len(), 4);
}

#[test]
fn invalid_parameters_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let (c, err) = code(dir.path(), &["simulate", "--k", "1", "--out", "x"]);
    assert_eq!(c, 2, "{err}");
    let (c, _) = code(
        dir.path(),
        &["simulate", "--p-yes", "0.0001", "--n", "100", "--out", "x"],
    );
    assert_eq!(c, 2);
}

#[test]
fn adversarial_bundles_contain_negative_skills() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mut with_negative = 0;
    for seed in 0..20 {
        let out = format!("s{seed}");
        ok(
            d,
            &[
                "simulate",
                "--preset",
                "SIM-ADVERSARIAL",
                "--seed",
                &seed.to_string(),
                "--out",
                &out,
            ],
        );
        let text = fs::read_to_string(d.join(&out).join("alphas.csv")).unwrap();
        let negative = text
            .lines()
            .skip(1)
            .any(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap() < 0.0);
        with_negative += usize::from(negative);
    }
    assert!(with_negative >= 19, "{with_negative}/20");
}

fn write_random(path: &Path, k: usize, n: usize, kind: Kind, seed: u64) {
    let mut r = common::rng(seed);
    let values = Array2::from_shape_fn((k, n), |_| match kind {
        Kind::Continuous => r.random::<f64>(),
        Kind::Binary => f64::from(u8::from(r.random_bool(0.4))),
    });
    write_responses(
        path,
        &ResponseMatrix::with_default_ids(values, kind).unwrap(),
    )
    .unwrap();
}

fn score_rows(path: &Path) -> usize {
    fs::read_to_string(path).unwrap().lines().skip(1).count()
}

#[test]
fn aggregate_handles_the_real_dataset_shapes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    // 8 teams scoring 200 candidate targets; 24 raters labelling 111 images
    write_random(&d.join("dream.csv"), 8, 200, Kind::Continuous, 1);
    write_random(&d.join("skin.csv"), 24, 111, Kind::Binary, 2);
    ok(
        d,
        &[
            "aggregate",
            "--in",
            "dream.csv",
            "--method",
            "pca",
            "--out",
            "dream_pca.csv",
        ],
    );
    ok(
        d,
        &[
            "aggregate",
            "--in",
            "dream.csv",
            "--method",
            "isomap",
            "--neighbors",
            "15",
            "--out",
            "dream_iso.csv",
        ],
    );
    ok(
        d,
        &[
            "aggregate",
            "--in",
            "skin.csv",
            "--method",
            "sml",
            "--out",
            "skin_sml.csv",
        ],
    );
    assert_eq!(score_rows(&d.join("dream_pca.csv")), 200);
    assert_eq!(score_rows(&d.join("dream_iso.csv")), 200);
    assert_eq!(score_rows(&d.join("skin_sml.csv")), 111);
    let header = fs::read_to_string(d.join("skin_sml.csv")).unwrap();
    assert!(header.starts_with("question_id,score,orientation\n"));
}

#[test]
fn aggregate_error_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_random(&d.join("r.csv"), 6, 100, Kind::Continuous, 3);
    let (c, err) = code(
        d,
        &[
            "aggregate",
            "--in",
            "r.csv",
            "--method",
            "isomap",
            "--neighbors",
            "200",
            "--out",
            "s.csv",
        ],
    );
    assert_eq!(c, 2, "{err}");
    let (c, _) = code(
        d,
        &[
            "aggregate",
            "--in",
            "r.csv",
            "--method",
            "sml",
            "--out",
            "s.csv",
        ],
    );
    assert_eq!(c, 2);
    let (c, _) = code(
        d,
        &[
            "aggregate",
            "--in",
            "missing.csv",
            "--method",
            "pca",
            "--out",
            "s.csv",
        ],
    );
    assert_eq!(c, 4);
    fs::write(d.join("bad.csv"), "question_id,I1,I2\nQ1,1,x\n").unwrap();
    let (c, _) = code(
        d,
        &[
            "aggregate",
            "--in",
            "bad.csv",
            "--method",
            "pca",
            "--out",
            "s.csv",
        ],
    );
    assert_eq!(c, 2);

    // two answer patterns, each shared by ten questions: the 3-nearest-neighbor
    // graph splits into two components
    let mut text = String::from("#kind=binary\nquestion_id,I1,I2,I3\n");
    for q in 0..20 {
        let row = if q < 10 { "1,0,1" } else { "0,1,0" };
        text.push_str(&format!("Q{q},{row}\n"));
    }
    fs::write(d.join("split.csv"), text).unwrap();
    let (c, err) = code(
        d,
        &[
            "aggregate",
            "--in",
            "split.csv",
            "--method",
            "isomap",
            "--neighbors",
            "3",
            "--out",
            "s.csv",
        ],
    );
    assert_eq!(c, 3, "{err}");
}

fn write_pairs(path: &Path, header: &str, rows: &[(String, String)]) {
    let mut text = format!("{header}\n");
    for (a, b) in rows {
        text.push_str(&format!("{a},{b}\n"));
    }
    fs::write(path, text).unwrap();
}

#[test]
fn evaluate_perfect_scores_and_misaligned_truth() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let labels: Vec<u8> = (0..30).map(|i| u8::from(i % 3 == 0)).collect();
    let truth: Vec<(String, String)> = labels
        .iter()
        .enumerate()
        .map(|(i, l)| (format!("Q{}", i + 1), l.to_string()))
        .collect();
    write_pairs(&d.join("truth.csv"), "question_id,label", &truth);
    let mut scores = String::from("question_id,score,orientation\n");
    for (i, l) in labels.iter().enumerate() {
        scores.push_str(&format!(
            "Q{},{},as_computed\n",
            i + 1,
            f64::from(*l) * 10.0 + i as f64 / 100.0
        ));
    }
    fs::write(d.join("scores.csv"), scores).unwrap();
    ok(
        d,
        &[
            "evaluate",
            "--scores",
            "scores.csv",
            "--truth",
            "truth.csv",
            "--out",
            "r.json",
        ],
    );
    let report: Value =
        serde_json::from_str(&fs::read_to_string(d.join("r.json")).unwrap()).unwrap();
    assert_eq!(report["auroc"], 1.0);
    assert_eq!(report["aupr"], 1.0);

    let mut shuffled = truth.clone();
    shuffled.swap(3, 17);
    write_pairs(&d.join("shuffled.csv"), "question_id,label", &shuffled);
    let (c, err) = code(
        d,
        &[
            "evaluate",
            "--scores",
            "scores.csv",
            "--truth",
            "shuffled.csv",
            "--out",
            "r2.json",
        ],
    );
    assert_eq!(c, 5, "{err}");
    assert!(err.contains("Q4") && err.contains("Q18"), "{err}");
}

#[test]
fn evaluation_report_recomputes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "simulate",
            "--preset",
            "SIM-SMALL",
            "--seed",
            "2",
            "--out",
            "data",
        ],
    );
    ok(
        d,
        &[
            "aggregate",
            "--in",
            "data/responses.csv",
            "--method",
            "fa",
            "--out",
            "fa.csv",
        ],
    );
    ok(
        d,
        &[
            "evaluate",
            "--scores",
            "fa.csv",
            "--truth",
            "data/truth.csv",
            "--out",
            "r.json",
        ],
    );
    let report: Value =
        serde_json::from_str(&fs::read_to_string(d.join("r.json")).unwrap()).unwrap();
    let arr = |v: &Value| -> Vec<f64> {
        v.as_array()
            .unwrap()
            .iter()
            .map(|x| x.as_f64().unwrap())
            .collect()
    };

    // area under the stored curve
    let (fpr, tpr) = (arr(&report["roc"]["fpr"]), arr(&report["roc"]["tpr"]));
    let area: f64 = (1..fpr.len())
        .map(|i| (fpr[i] - fpr[i - 1]) * (tpr[i] + tpr[i - 1]) / 2.0)
        .sum();
    assert!((area - report["auroc"].as_f64().unwrap()).abs() <= 1e-12);

    // AUROC recomputed from the files on disk
    let read = |f: &str| -> Vec<(String, f64)> {
        fs::read_to_string(d.join(f))
            .unwrap()
            .lines()
            .skip(1)
            .map(|l| {
                let mut it = l.split(',');
                (
                    it.next().unwrap().to_string(),
                    it.next().unwrap().parse().unwrap(),
                )
            })
            .collect()
    };
    let scores: Vec<f64> = read("fa.csv").into_iter().map(|(_, s)| s).collect();
    let labels: Vec<bool> = read("data/truth.csv")
        .into_iter()
        .map(|(_, l)| l == 1.0)
        .collect();
    let mw = common::mann_whitney(&scores, &labels);
    assert!((mw.max(1.0 - mw) - report["auroc"].as_f64().unwrap()).abs() <= 1e-12);
    assert_eq!(report["n_questions"], 100);
    assert_eq!(report["positives"], 30);
}

#[test]
fn thread_count_does_not_change_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let run = |threads: &str, file: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_crowdwise"))
            .args([
                "study",
                "--compare",
                "binarization",
                "--preset",
                "SIM-SMALL",
                "--replicates",
                "16",
            ])
            .args(["--methods", "pca,isomap:10,sml", "--out", file])
            .env("CROWDWISE_THREADS", threads)
            .current_dir(d)
            .output()
            .unwrap();
        assert!(out.status.success());
        fs::read(d.join(file)).unwrap()
    };
    assert_eq!(run("1", "one.csv"), run("4", "four.csv"));
}

#[test]
fn verify_detects_changed_inputs_and_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "simulate",
            "--preset",
            "SIM-SMALL",
            "--seed",
            "4",
            "--out",
            "data",
        ],
    );
    ok(
        d,
        &[
            "aggregate",
            "--in",
            "data/responses.csv",
            "--method",
            "pca",
            "--out",
            "pca.csv",
        ],
    );
    let msg = ok(d, &["verify", "pca.csv.manifest.json"]);
    assert!(msg.contains("bit-identical"), "{msg}");

    // a tampered digest no longer matches the re-run
    let path = d.join("data/manifest.json");
    let mut manifest: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    manifest["output_digests"]["truth.csv"] = Value::from("00");
    fs::write(
        d.join("tampered.json"),
        serde_json::to_string(&manifest).unwrap(),
    )
    .unwrap();
    let (c, err) = code(d, &["verify", "tampered.json"]);
    assert_eq!(c, 2, "{err}");
    assert!(err.contains("truth.csv"), "{err}");

    // an input edited after the run is reported before any re-run
    let responses = d.join("data/responses.csv");
    let text = fs::read_to_string(&responses).unwrap();
    fs::write(&responses, text.replacen("Q1,", "Q1,9", 1)).unwrap();
    let (c, err) = code(d, &["verify", "pca.csv.manifest.json"]);
    assert_eq!(c, 2, "{err}");
    assert!(err.contains("changed"), "{err}");
}

#[test]
fn cv_study_on_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "simulate",
            "--preset",
            "SIM-SMALL",
            "--seed",
            "6",
            "--out",
            "data",
        ],
    );
    let out = ok(
        d,
        &[
            "study",
            "--compare",
            "cv",
            "--in",
            "data/responses.csv",
            "--truth",
            "data/truth.csv",
            "--replicates",
            "10",
            "--classifiers",
            "ols,knn:5",
            "--out",
            "cv.csv",
        ],
    );
    assert!(out.contains("supervised knn(5)"), "{out}");
    let rows = fs::read_to_string(d.join("cv.csv")).unwrap();
    // header + 10 repeats x (4 crowd + 2 supervised)
    assert_eq!(rows.lines().count(), 1 + 10 * 6);
    ok(d, &["verify", "cv.csv.manifest.json"]);
}
