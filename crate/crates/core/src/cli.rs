//! Command-line front end: argument definitions, the five commands and run
//! manifests. The binary only parses arguments and maps errors to exit codes.
//!
//! Every command writes a manifest next to its output holding the resolved
//! parameters, input digests, output digests and the invocation itself with
//! absolute paths. `verify` re-runs that invocation into a scratch directory
//! and compares digests.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::aggregators::{consensus, AggregatorSpec, Method};
use crate::error::{CrowdError, Result};
use crate::io;
use crate::metrics::{evaluate_scores_two_sided, median, one_sided_t_test, pr_curve, roc_curve};
use crate::preprocess::perfect_binarize;
use crate::seed::{mix_seed, streams};
use crate::simulator::{
    convergence_study, replicate_study, rows_for, simulate_dataset, Preset, SimulationParams,
    StudyOptions, StudyRow,
};
use crate::supervised::{cv_compare, Classifier, SplitSpec};
use crate::types::GroundTruth;

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const THREADS_ENV: &str = "CROWDWISE_THREADS";

#[derive(Debug, Clone, Parser, Serialize, Deserialize)]
#[command(
    name = "crowdwise",
    version,
    about = "Crowd consensus by one-dimensional dimension reduction"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Simulate a crowd dataset and write its CSV bundle.
    Simulate(SimulateArgs),
    /// Compute consensus scores from a responses file.
    Aggregate(AggregateArgs),
    /// Score a consensus against ground truth (two-sided AUROC and AUPR).
    Evaluate(EvaluateArgs),
    /// Run a replicated simulation or cross-validation study.
    Study(StudyArgs),
    /// Re-run the command recorded in a manifest and compare outputs.
    Verify(VerifyArgs),
}

fn parse_preset(s: &str) -> std::result::Result<Preset, String> {
    s.parse().map_err(|e: CrowdError| e.to_string())
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ParamArgs {
    /// Base parameter set; individual flags override its fields.
    #[arg(long, value_parser = parse_preset)]
    pub preset: Option<Preset>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub p_yes: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub alpha_bar: Option<f64>,
    #[arg(long)]
    pub sigma_alpha: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl ParamArgs {
    pub fn resolve(&self) -> Result<SimulationParams> {
        let base = self.preset.unwrap_or(Preset::Base).params(self.seed);
        let p = SimulationParams {
            k: self.k.unwrap_or(base.k),
            n: self.n.unwrap_or(base.n),
            p_yes: self.p_yes.unwrap_or(base.p_yes),
            beta: self.beta.unwrap_or(base.beta),
            alpha_bar: self.alpha_bar.unwrap_or(base.alpha_bar),
            sigma_alpha: self.sigma_alpha.unwrap_or(base.sigma_alpha),
            seed: self.seed,
        };
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Write perfectly binarized responses instead of continuous ones.
    #[arg(long)]
    pub binarize: bool,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct AggregateArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// mean, median, pca, fa, mds, isomap, lle, spectral or sml.
    #[arg(long)]
    pub method: String,
    /// Neighbor count for isomap, lle and spectral.
    #[arg(long)]
    pub neighbors: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub scores: PathBuf,
    #[arg(long)]
    pub truth: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Compare {
    /// Methods on continuous (or binarized) data against SML on perfectly
    /// binarized data.
    Binarization,
    /// The binarization study swept over the number of individuals.
    Convergence,
    /// Crowd methods against supervised classifiers on repeated splits.
    Cv,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct StudyArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, value_enum)]
    pub compare: Compare,
    /// Replicates per setting (repeats for the cv study).
    #[arg(long, default_value_t = 200)]
    pub replicates: usize,
    /// Comma-separated aggregators, e.g. `pca,mean,isomap:10`.
    #[arg(long, value_delimiter = ',')]
    pub methods: Option<Vec<String>>,
    /// Feed binarized responses to every method, not only SML.
    #[arg(long)]
    pub binarize: bool,
    /// Individual counts of the convergence sweep.
    #[arg(long, value_delimiter = ',', default_value = "4,8,16,32,64")]
    pub ks: Vec<usize>,
    /// Training fraction of the cv study.
    #[arg(long, default_value_t = 0.25)]
    pub fraction: f64,
    /// Comma-separated classifiers of the cv study, e.g. `ols,knn:25`.
    #[arg(long, value_delimiter = ',')]
    pub classifiers: Option<Vec<String>>,
    /// Responses file for the cv study instead of a simulated dataset.
    #[arg(long = "in", requires = "truth")]
    pub input: Option<PathBuf>,
    #[arg(long, requires = "input")]
    pub truth: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct VerifyArgs {
    /// Manifest written by an earlier run.
    pub manifest: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub seed: Option<u64>,
    pub artifact_version: String,
    /// Absolute input path to SHA-256.
    pub input_digests: BTreeMap<String, String>,
    /// Output file name (relative to the output location) to SHA-256.
    pub output_digests: BTreeMap<String, String>,
    pub invocation: Command,
}

/// Where a command's manifest goes: inside the output directory for
/// `simulate`, next to the output file otherwise.
pub fn manifest_path(command: &Command) -> Option<PathBuf> {
    match command {
        Command::Simulate(a) => Some(a.out.join("manifest.json")),
        Command::Aggregate(AggregateArgs { out, .. })
        | Command::Evaluate(EvaluateArgs { out, .. })
        | Command::Study(StudyArgs { out, .. }) => {
            let mut name = out.file_name()?.to_os_string();
            name.push(".manifest.json");
            Some(out.with_file_name(name))
        }
        Command::Verify(_) => None,
    }
}

fn absolute(path: &Path) -> Result<PathBuf> {
    std::path::absolute(path).map_err(|e| CrowdError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::Aggregate(_) => "aggregate",
            Command::Evaluate(_) => "evaluate",
            Command::Study(_) => "study",
            Command::Verify(_) => "verify",
        }
    }

    /// The same command with every path made absolute.
    fn absolutized(&self) -> Result<Command> {
        let mut c = self.clone();
        match &mut c {
            Command::Simulate(a) => a.out = absolute(&a.out)?,
            Command::Aggregate(a) => {
                a.input = absolute(&a.input)?;
                a.out = absolute(&a.out)?;
            }
            Command::Evaluate(a) => {
                a.scores = absolute(&a.scores)?;
                a.truth = absolute(&a.truth)?;
                a.out = absolute(&a.out)?;
            }
            Command::Study(a) => {
                a.out = absolute(&a.out)?;
                if let Some(p) = &mut a.input {
                    *p = absolute(p)?;
                }
                if let Some(p) = &mut a.truth {
                    *p = absolute(p)?;
                }
            }
            Command::Verify(a) => a.manifest = absolute(&a.manifest)?,
        }
        Ok(c)
    }

    fn inputs(&self) -> Vec<PathBuf> {
        match self {
            Command::Aggregate(a) => vec![a.input.clone()],
            Command::Evaluate(a) => vec![a.scores.clone(), a.truth.clone()],
            Command::Study(a) => a.input.iter().chain(&a.truth).cloned().collect(),
            _ => Vec::new(),
        }
    }

    /// Copy whose output goes to `dir` under the same file name.
    fn redirected(&self, dir: &Path) -> Command {
        let mut c = self.clone();
        let retarget = |out: &mut PathBuf| {
            *out = dir.join(out.file_name().unwrap_or_else(|| "out".as_ref()));
        };
        match &mut c {
            Command::Simulate(a) => a.out = dir.join("bundle"),
            Command::Aggregate(a) => retarget(&mut a.out),
            Command::Evaluate(a) => retarget(&mut a.out),
            Command::Study(a) => retarget(&mut a.out),
            Command::Verify(_) => {}
        }
        c
    }
}

/// Outcome of one command: parameters for the manifest, output files and a
/// human-readable summary.
struct Outcome {
    parameters: BTreeMap<String, serde_json::Value>,
    seed: Option<u64>,
    outputs: Vec<PathBuf>,
    summary: Vec<String>,
}

fn to_map(v: serde_json::Value) -> BTreeMap<String, serde_json::Value> {
    match v {
        serde_json::Value::Object(m) => m.into_iter().collect(),
        _ => BTreeMap::new(),
    }
}

/// Runs one parsed command. Returns the summary lines to print.
pub fn run(cli: Cli) -> Result<Vec<String>> {
    match &cli.command {
        Command::Verify(a) => verify(&a.manifest),
        command => {
            let command = command.absolutized()?;
            let outcome = execute(&command)?;
            let manifest_file = manifest_path(&command).expect("non-verify command");
            let mut summary = outcome.summary.clone();
            write_manifest(&command, outcome, &manifest_file)?;
            summary.push(format!("manifest: {}", manifest_file.display()));
            Ok(summary)
        }
    }
}

fn write_manifest(command: &Command, outcome: Outcome, path: &Path) -> Result<()> {
    let mut input_digests = BTreeMap::new();
    for p in command.inputs() {
        input_digests.insert(p.display().to_string(), io::sha256_file(&p)?);
    }
    let base = match command {
        Command::Simulate(a) => a.out.clone(),
        _ => path.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    let mut output_digests = BTreeMap::new();
    for p in &outcome.outputs {
        let key = p.strip_prefix(&base).unwrap_or(p).display().to_string();
        output_digests.insert(key, io::sha256_file(p)?);
    }
    let manifest = RunManifest {
        command: command.name().to_string(),
        parameters: outcome.parameters,
        seed: outcome.seed,
        artifact_version: ARTIFACT_VERSION.to_string(),
        input_digests,
        output_digests,
        invocation: command.clone(),
    };
    io::write_json(path, &manifest)
}

pub fn read_manifest(path: &Path) -> Result<RunManifest> {
    let text = io::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| CrowdError::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn verify(manifest_file: &Path) -> Result<Vec<String>> {
    let manifest = read_manifest(manifest_file)?;
    for (path, digest) in &manifest.input_digests {
        let now = io::sha256_file(Path::new(path))?;
        if &now != digest {
            return Err(CrowdError::Contract(format!(
                "verification failed: input {path} changed since the recorded run"
            )));
        }
    }
    let scratch = tempfile::tempdir().map_err(|e| CrowdError::Io {
        path: std::env::temp_dir().display().to_string(),
        message: e.to_string(),
    })?;
    let rerun = manifest.invocation.redirected(scratch.path());
    let outcome = execute(&rerun)?;
    let base = match &rerun {
        Command::Simulate(a) => a.out.clone(),
        _ => scratch.path().to_path_buf(),
    };
    let mut fresh = BTreeMap::new();
    for p in &outcome.outputs {
        let key = p.strip_prefix(&base).unwrap_or(p).display().to_string();
        fresh.insert(key, io::sha256_file(p)?);
    }
    if fresh != manifest.output_digests {
        let differing: Vec<&String> = manifest
            .output_digests
            .keys()
            .chain(fresh.keys())
            .filter(|k| manifest.output_digests.get(*k) != fresh.get(*k))
            .collect();
        return Err(CrowdError::Contract(format!(
            "verification failed: outputs differ: {differing:?}"
        )));
    }
    Ok(vec![format!(
        "verified {} output file(s) of `{}` bit-identical",
        fresh.len(),
        manifest.command
    )])
}

fn execute(command: &Command) -> Result<Outcome> {
    match command {
        Command::Simulate(a) => simulate(a),
        Command::Aggregate(a) => aggregate(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Study(a) => study(a),
        Command::Verify(_) => Err(CrowdError::InvalidArgument(
            "verify cannot be nested".into(),
        )),
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| CrowdError::Io {
        path: dir.display().to_string(),
        message: e.to_string(),
    })
}

fn simulate(a: &SimulateArgs) -> Result<Outcome> {
    let params = a.params.resolve()?;
    let data = simulate_dataset(&params)?;
    create_dir(&a.out)?;
    let responses = if a.binarize {
        perfect_binarize(
            &data.raw_matrix,
            &data.truth,
            mix_seed(params.seed, streams::BINARIZE),
        )?
    } else {
        data.raw_matrix.clone()
    };
    let qids = responses.question_ids().to_vec();
    let files = ["responses.csv", "truth.csv", "probs.csv", "alphas.csv"].map(|f| a.out.join(f));
    io::write_responses(&files[0], &responses)?;
    io::write_truth(&files[1], &qids, &data.truth)?;
    io::write_probs(&files[2], &qids, &data.probs.probs)?;
    io::write_alphas(&files[3], responses.individual_ids(), &data.alphas)?;
    let mut parameters = to_map(json!(params));
    parameters.insert(
        "preset".into(),
        json!(a.params.preset.unwrap_or(Preset::Base)),
    );
    parameters.insert("binarize".into(), json!(a.binarize));
    Ok(Outcome {
        parameters,
        seed: Some(params.seed),
        outputs: files.to_vec(),
        summary: vec![format!(
            "simulated {} individuals x {} questions ({} positive) into {}",
            params.k,
            params.n,
            data.truth.positives(),
            a.out.display()
        )],
    })
}

fn aggregate(a: &AggregateArgs) -> Result<Outcome> {
    let method: Method = a.method.parse()?;
    let spec = match a.neighbors {
        Some(k) => AggregatorSpec::with_neighbors(method, k),
        None => AggregatorSpec::new(method),
    };
    let raw = io::read_responses(&a.input)?;
    let scores = consensus(&raw, &spec)?;
    io::write_scores(&a.out, raw.question_ids(), &scores)?;
    let mut summary = vec![format!(
        "{}: {} scores ({} input, orientation {}) -> {}",
        spec.tag(),
        scores.len(),
        raw.kind(),
        scores.orientation,
        a.out.display()
    )];
    summary.extend(scores.warnings.iter().map(|w| format!("warning: {w}")));
    Ok(Outcome {
        parameters: to_map(json!({
            "method": spec.method,
            "neighbors": spec.n_neighbors,
            "kind": raw.kind(),
        })),
        seed: None,
        outputs: vec![a.out.clone()],
        summary,
    })
}

fn evaluate(a: &EvaluateArgs) -> Result<Outcome> {
    let (score_ids, scores) = io::read_scores(&a.scores)?;
    let (truth_ids, truth) = io::read_truth(&a.truth)?;
    io::check_alignment(&score_ids, &truth_ids)?;
    let tag = a
        .scores
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let report = evaluate_scores_two_sided(&scores, &truth, &tag)?;
    let orient = |sign: f64| scores.iter().map(|s| s * sign).collect::<Vec<f64>>();
    let roc = roc_curve(&orient(report.auroc_orientation.sign()), &truth)?;
    let pr = pr_curve(&orient(report.aupr_orientation.sign()), &truth)?;
    let body = json!({
        "method_tag": report.method_tag,
        "n_questions": truth.len(),
        "positives": truth.positives(),
        "auroc": report.auroc,
        "aupr": report.aupr,
        "auroc_orientation": report.auroc_orientation,
        "aupr_orientation": report.aupr_orientation,
        "roc": { "fpr": roc.fpr, "tpr": roc.tpr, "thresholds": roc.thresholds },
        "pr": { "recall": pr.recall, "precision": pr.precision, "thresholds": pr.thresholds },
    });
    io::write_json(&a.out, &body)?;
    Ok(Outcome {
        parameters: BTreeMap::new(),
        seed: None,
        outputs: vec![a.out.clone()],
        summary: vec![format!(
            "auroc {:.6} ({}), aupr {:.6} ({}) over {} questions",
            report.auroc,
            report.auroc_orientation,
            report.aupr,
            report.aupr_orientation,
            truth.len()
        )],
    })
}

fn parse_methods(list: &Option<Vec<String>>, default: &[&str]) -> Result<Vec<AggregatorSpec>> {
    match list {
        Some(v) => v.iter().map(|s| s.parse()).collect(),
        None => default.iter().map(|s| s.parse()).collect(),
    }
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or("n/a".into(), |x| format!("{x:.4}"))
}

fn study_summary(rows: &[StudyRow], methods: &[AggregatorSpec], by_k: bool) -> Vec<String> {
    let mut ks: Vec<usize> = rows.iter().map(|r| r.k).collect();
    ks.dedup();
    let mut out = Vec::new();
    for k in ks {
        for m in methods {
            let tag = m.tag();
            let mine: Vec<&StudyRow> = rows_for(rows, &tag).filter(|r| r.k == k).collect();
            let pick = |f: fn(&StudyRow) -> Option<f64>| {
                mine.iter().filter_map(|r| f(r)).collect::<Vec<f64>>()
            };
            let auroc = pick(|r| r.auroc);
            let spearman = pick(|r| r.spearman_vs_probs);
            let tpr = pick(|r| r.tpr_diff_vs_sml);
            let prop = pick(|r| r.prop_diff_vs_sml);
            let excluded = mine.iter().filter(|r| r.excluded.is_some()).count();
            let mut line = format!(
                "{}{tag}: median auroc {}, median |spearman| {}",
                if by_k {
                    format!("k={k} ")
                } else {
                    String::new()
                },
                fmt_opt(median(&auroc)),
                fmt_opt(median(&spearman)),
            );
            if !tpr.is_empty() {
                line.push_str(&format!(", mean tpr diff vs sml {}", fmt_opt(mean(&tpr))));
                if let Ok(t) = one_sided_t_test(&tpr) {
                    line.push_str(&format!(
                        " (t = {:.3}, one-sided p = {:.3e})",
                        t.t, t.p_value
                    ));
                }
            }
            if !prop.is_empty() {
                line.push_str(&format!(", median prop diff {}", fmt_opt(median(&prop))));
            }
            if excluded > 0 {
                line.push_str(&format!(", {excluded} flagged"));
            }
            out.push(line);
        }
    }
    out
}

fn study(a: &StudyArgs) -> Result<Outcome> {
    let params = a.params.resolve()?;
    let mut parameters = to_map(json!(params));
    parameters.insert(
        "preset".into(),
        json!(a.params.preset.unwrap_or(Preset::Base)),
    );
    parameters.insert("compare".into(), json!(a.compare));
    parameters.insert("replicates".into(), json!(a.replicates));
    let summary = match a.compare {
        Compare::Binarization | Compare::Convergence => {
            let default: &[&str] = if a.compare == Compare::Binarization {
                &["pca", "sml"]
            } else {
                &["mean", "median", "pca", "fa", "sml"]
            };
            let methods = parse_methods(&a.methods, default)?;
            let options = StudyOptions {
                methods: methods.clone(),
                binarize: a.binarize,
            };
            parameters.insert(
                "methods".into(),
                json!(methods.iter().map(|m| m.tag()).collect::<Vec<_>>()),
            );
            parameters.insert("binarize".into(), json!(a.binarize));
            let rows = if a.compare == Compare::Binarization {
                replicate_study(&params, a.replicates, &options)?
            } else {
                parameters.insert("ks".into(), json!(a.ks));
                convergence_study(&params, &a.ks, a.replicates, &options)?
            };
            io::write_table(&a.out, &rows)?;
            study_summary(&rows, &methods, a.compare == Compare::Convergence)
        }
        Compare::Cv => {
            let methods = parse_methods(&a.methods, &["mean", "median", "pca", "fa"])?;
            let classifiers: Vec<Classifier> = match &a.classifiers {
                Some(v) => v.iter().map(|s| s.parse()).collect::<Result<_>>()?,
                None => Classifier::defaults(),
            };
            let split = SplitSpec::new(a.fraction, a.replicates, params.seed)?;
            let (raw, truth) = match (&a.input, &a.truth) {
                (Some(input), Some(truth_file)) => {
                    let raw = io::read_responses(input)?;
                    let (ids, truth): (Vec<String>, GroundTruth) = io::read_truth(truth_file)?;
                    io::check_alignment(raw.question_ids(), &ids)?;
                    (raw, truth)
                }
                _ => {
                    let d = simulate_dataset(&params)?;
                    (d.raw_matrix, d.truth)
                }
            };
            parameters.insert(
                "methods".into(),
                json!(methods.iter().map(|m| m.tag()).collect::<Vec<_>>()),
            );
            parameters.insert(
                "classifiers".into(),
                json!(classifiers.iter().map(Classifier::name).collect::<Vec<_>>()),
            );
            parameters.insert("fraction".into(), json!(a.fraction));
            let res = cv_compare(&raw, &truth, &methods, &classifiers, &split)?;
            io::write_table(&a.out, &res.rows)?;
            let mut s: Vec<String> = res
                .summaries
                .iter()
                .map(|x| {
                    format!(
                        "{:?} {}: median auroc {}, median aupr {} over {} repeats",
                        x.family,
                        x.method,
                        fmt_opt(x.median_auroc),
                        fmt_opt(x.median_aupr),
                        x.evaluated
                    )
                    .to_lowercase()
                })
                .collect();
            if !res.skipped.is_empty() {
                s.push(format!(
                    "{} repeat(s) skipped: {}",
                    res.skipped.len(),
                    res.skipped[0].1
                ));
            }
            s
        }
    };
    Ok(Outcome {
        parameters,
        seed: Some(params.seed),
        outputs: vec![a.out.clone()],
        summary,
    })
}
