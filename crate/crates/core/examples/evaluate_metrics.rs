//! ROC and precision-recall curves with tied scores, and the two-sided
//! report that resolves the sign of a consensus.
//!
//! cargo run --example evaluate_metrics

use crowdwise::metrics::{evaluate_scores_two_sided, pr_curve, roc_curve};
use crowdwise::types::GroundTruth;

fn main() -> crowdwise::error::Result<()> {
    let truth = GroundTruth::from_u8(&[1, 1, 0, 1, 0, 0, 0, 1]);
    let scores = [0.9, 0.7, 0.7, 0.6, 0.4, 0.4, 0.2, 0.1];

    let roc = roc_curve(&scores, &truth)?;
    println!("roc vertices (fpr, tpr):");
    for (f, t) in roc.fpr.iter().zip(&roc.tpr) {
        println!("  {f:.2} {t:.2}");
    }
    println!(
        "auroc {:.4}, tpr at fpr 0.3: {:.4}",
        roc.auc(),
        roc.tpr_at(0.3)
    );
    println!(
        "average precision {:.4}",
        pr_curve(&scores, &truth)?.average_precision
    );

    // a consensus whose sign came out backwards is still read correctly
    let flipped: Vec<f64> = scores.iter().map(|s| -s).collect();
    let r = evaluate_scores_two_sided(&flipped, &truth, "flipped")?;
    println!(
        "two-sided on negated scores: auroc {:.4} ({})",
        r.auroc, r.auroc_orientation
    );
    Ok(())
}
