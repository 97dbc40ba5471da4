//! Every aggregator on one small simulated dataset, including the
//! neighbor-graph methods over their default neighbor grid.
//!
//! cargo run --release --example manifold_methods

use crowdwise::aggregators::{consensus, AggregatorSpec};
use crowdwise::metrics::{evaluate_two_sided, spearman_abs};
use crowdwise::simulator::{simulate_dataset, Preset};

fn main() -> crowdwise::error::Result<()> {
    let data = simulate_dataset(&Preset::Small.params(3))?;
    let n = data.raw_matrix.n_questions();
    for spec in AggregatorSpec::default_grid(n, false) {
        match consensus(&data.raw_matrix, &spec) {
            Ok(scores) => {
                let r = evaluate_two_sided(&scores, &data.truth)?;
                let rho = spearman_abs(&scores.scores, &data.probs.probs)?;
                println!(
                    "{:>14}: auroc {:.3}  |spearman vs probs| {:.3}",
                    spec.tag(),
                    r.auroc,
                    rho
                );
            }
            Err(e) => println!("{:>14}: {e}", spec.tag()),
        }
    }
    Ok(())
}
