//! Replicated comparison of PCA on continuous answers against SML on
//! perfectly binarized answers: TPR gained at SML's operating point.
//!
//! cargo run --release --example binarization_study

use crowdwise::metrics::one_sided_t_test;
use crowdwise::simulator::{replicate_study, rows_for, Preset, StudyOptions};

fn main() -> crowdwise::error::Result<()> {
    let params = Preset::Base.params(2024);
    let options = StudyOptions {
        methods: vec!["pca".parse()?],
        binarize: false,
    };
    let rows = replicate_study(&params, 200, &options)?;
    let diffs: Vec<f64> = rows_for(&rows, "pca")
        .filter_map(|r| r.tpr_diff_vs_sml)
        .collect();
    let t = one_sided_t_test(&diffs)?;
    println!(
        "{} replicates: mean TPR difference {:.4}, t = {:.2}, one-sided p = {:.2e}",
        t.n, t.mean, t.t, t.p_value
    );
    Ok(())
}
