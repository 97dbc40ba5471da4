use rayon::prelude::*;
use serde::Serialize;

use super::{simulate_dataset, SimulatedDataset, SimulationParams};
use crate::aggregators::{consensus, sml_predict, AggregatorSpec, Method};
use crate::error::{CrowdError, Result};
use crate::metrics::{
    auroc, evaluate_two_sided, point_rates, proportion_of_differences, roc_curve, spearman_abs,
    tpr_difference_at_fpr,
};
use crate::preprocess::perfect_binarize;
use crate::seed::{mix_seed, streams};
use crate::types::{Orientation, ScoreVector};

#[derive(Debug, Clone, PartialEq)]
pub struct StudyOptions {
    pub methods: Vec<AggregatorSpec>,
    /// Feed perfectly binarized responses to every method, not only SML.
    pub binarize: bool,
}

/// One (replicate, method) result. Comparison columns are relative to SML on
/// perfectly binarized responses of the same replicate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyRow {
    pub k: usize,
    pub n: usize,
    pub replicate: usize,
    pub seed: u64,
    pub method: String,
    pub binarized: bool,
    pub auroc: Option<f64>,
    pub aupr: Option<f64>,
    pub auroc_orientation: Option<Orientation>,
    pub spearman_vs_probs: Option<f64>,
    pub auroc_delta_vs_probs: Option<f64>,
    pub tpr_diff_vs_sml: Option<f64>,
    pub prop_diff_vs_sml: Option<f64>,
    pub excluded: Option<String>,
}

/// Seed of replicate `r`: `mix_seed(seed, r)`.
pub fn replicate_seed(seed: u64, replicate: usize) -> u64 {
    mix_seed(seed, replicate as u64)
}

struct SmlReference {
    /// (FPR, TPR) of the thresholded SML labels.
    point: (f64, f64),
    labels: Vec<bool>,
}

fn empty_row(
    params: &SimulationParams,
    replicate: usize,
    spec: &AggregatorSpec,
    binarized: bool,
) -> StudyRow {
    StudyRow {
        k: params.k,
        n: params.n,
        replicate,
        seed: params.seed,
        method: spec.tag(),
        binarized,
        auroc: None,
        aupr: None,
        auroc_orientation: None,
        spearman_vs_probs: None,
        auroc_delta_vs_probs: None,
        tpr_diff_vs_sml: None,
        prop_diff_vs_sml: None,
        excluded: None,
    }
}

fn note(row: &mut StudyRow, msg: String) {
    row.excluded = Some(match row.excluded.take() {
        Some(prev) => format!("{prev}; {msg}"),
        None => msg,
    });
}

fn evaluate_row(
    row: &mut StudyRow,
    scores: &ScoreVector,
    data: &SimulatedDataset,
    probs_auroc: f64,
    sml: Option<&SmlReference>,
    is_sml: bool,
) -> Result<()> {
    let report = evaluate_two_sided(scores, &data.truth)?;
    row.auroc = Some(report.auroc);
    row.aupr = Some(report.aupr);
    row.auroc_orientation = Some(report.auroc_orientation);
    row.auroc_delta_vs_probs = Some(report.auroc - probs_auroc);
    match spearman_abs(&scores.scores, &data.probs.probs) {
        Ok(r) => row.spearman_vs_probs = Some(r),
        Err(e) => note(row, e.to_string()),
    }
    if is_sml {
        return Ok(());
    }
    let Some(sml) = sml else {
        return Ok(());
    };
    let oriented: Vec<f64> = scores
        .scores
        .iter()
        .map(|s| s * report.auroc_orientation.sign())
        .collect();
    let curve = roc_curve(&oriented, &data.truth)?;
    row.tpr_diff_vs_sml = Some(tpr_difference_at_fpr(&curve, sml.point));
    match proportion_of_differences(&sml.labels, scores) {
        Ok(p) => row.prop_diff_vs_sml = Some(p),
        Err(e @ CrowdError::Excluded(_)) => note(row, e.to_string()),
        Err(e) => return Err(e),
    }
    Ok(())
}

fn run_replicate(
    params: &SimulationParams,
    replicate: usize,
    options: &StudyOptions,
) -> Vec<StudyRow> {
    let p = SimulationParams {
        seed: replicate_seed(params.seed, replicate),
        ..*params
    };
    let mut rows: Vec<StudyRow> = options
        .methods
        .iter()
        .map(|spec| {
            let binarized = options.binarize || spec.method == Method::Sml;
            empty_row(&p, replicate, spec, binarized)
        })
        .collect();

    let data = match simulate_dataset(&p) {
        Ok(d) => d,
        Err(e) => {
            for row in &mut rows {
                note(row, format!("simulation failed: {e}"));
            }
            return rows;
        }
    };
    let probs_auroc =
        auroc(&data.probs.probs, &data.truth).expect("simulated truth has both classes");
    let binary = perfect_binarize(
        &data.matrix,
        &data.truth,
        mix_seed(p.seed, streams::BINARIZE),
    );

    let sml_spec = AggregatorSpec::new(Method::Sml);
    let sml_scores = binary
        .as_ref()
        .map_err(Clone::clone)
        .and_then(|b| consensus(b, &sml_spec));
    let sml_ref = sml_scores.as_ref().ok().map(|s| {
        let labels = sml_predict(s);
        let point = point_rates(&labels, &data.truth).expect("simulated truth has both classes");
        SmlReference { point, labels }
    });

    for (row, spec) in rows.iter_mut().zip(&options.methods) {
        let scores: Result<ScoreVector> = if spec.method == Method::Sml {
            sml_scores.clone()
        } else if options.binarize {
            binary
                .as_ref()
                .map_err(Clone::clone)
                .and_then(|b| consensus(b, spec))
        } else {
            consensus(&data.raw_matrix, spec)
        };
        let outcome = scores.and_then(|s| {
            evaluate_row(
                row,
                &s,
                &data,
                probs_auroc,
                sml_ref.as_ref(),
                spec.method == Method::Sml,
            )
        });
        if let Err(e) = outcome {
            note(row, e.to_string());
        }
        if sml_ref.is_none() && spec.method != Method::Sml {
            if let Err(e) = &sml_scores {
                note(row, format!("sml reference unavailable: {e}"));
            }
        }
    }
    rows
}

/// Runs `replicates` independent simulations and evaluates every method on
/// each. Rows come back in (replicate, method) order however the work was
/// scheduled. Failures are recorded in the `excluded` column.
pub fn replicate_study(
    params: &SimulationParams,
    replicates: usize,
    options: &StudyOptions,
) -> Result<Vec<StudyRow>> {
    params.validate()?;
    if replicates == 0 {
        return Err(CrowdError::InvalidArgument(
            "replicates must be at least 1".into(),
        ));
    }
    for spec in &options.methods {
        spec.validate(params.n)?;
    }
    Ok((0..replicates)
        .into_par_iter()
        .map(|r| run_replicate(params, r, options))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect())
}

/// [`replicate_study`] repeated for each number of individuals in `ks`.
pub fn convergence_study(
    params: &SimulationParams,
    ks: &[usize],
    replicates: usize,
    options: &StudyOptions,
) -> Result<Vec<StudyRow>> {
    let mut rows = Vec::new();
    for &k in ks {
        rows.extend(replicate_study(
            &SimulationParams { k, ..*params },
            replicates,
            options,
        )?);
    }
    Ok(rows)
}

/// Rows of one method, in replicate order.
pub fn rows_for<'a>(
    rows: &'a [StudyRow],
    method: &'a str,
) -> impl Iterator<Item = &'a StudyRow> + 'a {
    rows.iter().filter(move |r| r.method == method)
}
