//! Crowd wisdom, which never sees labels, against classifiers trained on a
//! quarter of the questions.
//!
//! cargo run --release --example cross_validation

use crowdwise::simulator::{simulate_dataset, Preset};
use crowdwise::supervised::{cv_compare, Classifier, SplitSpec};

fn main() -> crowdwise::error::Result<()> {
    let data = simulate_dataset(&Preset::Base.params(11))?;
    let crowd = ["mean", "median", "pca", "fa"]
        .iter()
        .map(|s| s.parse())
        .collect::<Result<Vec<_>, _>>()?;
    let split = SplitSpec::new(0.25, 100, 11)?;
    let res = cv_compare(
        &data.raw_matrix,
        &data.truth,
        &crowd,
        &Classifier::defaults(),
        &split,
    )?;
    for s in &res.summaries {
        println!(
            "{:?} {:>9}: median auroc {:.3}, median aupr {:.3}",
            s.family,
            s.method,
            s.median_auroc.unwrap_or(f64::NAN),
            s.median_aupr.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
