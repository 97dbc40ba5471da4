//! Binary crowds: the spectral meta-learner on perfectly binarized answers,
//! compared with PCA on the same binary matrix and on the original scores.
//!
//! cargo run --example binary_crowd_sml

use crowdwise::aggregators::{consensus, sml, AggregatorSpec, Method};
use crowdwise::metrics::evaluate_two_sided;
use crowdwise::preprocess::perfect_binarize;
use crowdwise::seed::{mix_seed, streams};
use crowdwise::simulator::{simulate_dataset, Preset};

fn main() -> crowdwise::error::Result<()> {
    let params = Preset::Base.params(8);
    let data = simulate_dataset(&params)?;
    let binary = perfect_binarize(
        &data.raw_matrix,
        &data.truth,
        mix_seed(params.seed, streams::BINARIZE),
    )?;

    let fit = sml(&binary)?;
    let weights: Vec<String> = fit.weights.iter().map(|w| format!("{w:+.2}")).collect();
    println!(
        "sml weights (true skills {:.2?}):\n  {}",
        data.alphas,
        weights.join(" ")
    );

    let runs = [
        ("sml on binary", &binary, Method::Sml),
        ("pca on binary", &binary, Method::Pca),
        ("pca on scores", &data.raw_matrix, Method::Pca),
    ];
    for (label, matrix, method) in runs {
        let scores = consensus(matrix, &AggregatorSpec::new(method))?;
        let r = evaluate_two_sided(&scores, &data.truth)?;
        println!("{label}: auroc {:.3}, aupr {:.3}", r.auroc, r.aupr);
    }
    Ok(())
}
