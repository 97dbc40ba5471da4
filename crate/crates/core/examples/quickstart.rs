//! Simulate a crowd, build a consensus with PCA and score it against truth.
//!
//! cargo run --example quickstart

use crowdwise::aggregators::{consensus, AggregatorSpec, Method};
use crowdwise::metrics::evaluate_two_sided;
use crowdwise::simulator::{simulate_dataset, Preset};

fn main() -> crowdwise::error::Result<()> {
    let data = simulate_dataset(&Preset::Base.params(42))?;
    println!(
        "{} individuals, {} questions, {} positives",
        data.raw_matrix.n_individuals(),
        data.raw_matrix.n_questions(),
        data.truth.positives()
    );
    for method in [
        Method::Mean,
        Method::Median,
        Method::Pca,
        Method::FactorAnalysis,
    ] {
        let scores = consensus(&data.raw_matrix, &AggregatorSpec::new(method))?;
        let report = evaluate_two_sided(&scores, &data.truth)?;
        println!(
            "{:>6}: auroc {:.3} ({}), aupr {:.3}",
            report.method_tag, report.auroc, report.auroc_orientation, report.aupr
        );
    }
    Ok(())
}
