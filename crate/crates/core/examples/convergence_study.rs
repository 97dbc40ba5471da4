//! How consensus quality grows with the number of individuals.
//!
//! cargo run --release --example convergence_study

use crowdwise::metrics::median;
use crowdwise::simulator::{convergence_study, rows_for, Preset, StudyOptions};

fn main() -> crowdwise::error::Result<()> {
    let params = Preset::Base.params(1);
    let ks = [4, 8, 16, 32, 64];
    let options = StudyOptions {
        methods: vec!["mean".parse()?, "pca".parse()?, "sml".parse()?],
        binarize: false,
    };
    let rows = convergence_study(&params, &ks, 30, &options)?;
    println!("median |spearman vs class probability|");
    println!("{:>5} {:>7} {:>7} {:>7}", "k", "mean", "pca", "sml");
    for k in ks {
        let at = |m: &str| {
            let v: Vec<f64> = rows_for(&rows, m)
                .filter(|r| r.k == k)
                .filter_map(|r| r.spearman_vs_probs)
                .collect();
            median(&v).unwrap_or(f64::NAN)
        };
        println!(
            "{k:>5} {:>7.3} {:>7.3} {:>7.3}",
            at("mean"),
            at("pca"),
            at("sml")
        );
    }
    Ok(())
}
