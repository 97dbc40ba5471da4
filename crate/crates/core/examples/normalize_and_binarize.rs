//! The preprocessing protocol: ranks and z-scores for continuous answers,
//! and perfect binarization against a known positive count.
//!
//! cargo run --example normalize_and_binarize

use crowdwise::preprocess::{normalize, perfect_binarize, NormalizationSpec};
use crowdwise::types::{GroundTruth, Kind, ResponseMatrix};
use ndarray::array;

fn main() -> crowdwise::error::Result<()> {
    // two raters on different scales, one with a tie
    let raw = ResponseMatrix::with_default_ids(
        array![[0.1, 0.9, 0.4, 0.8, 0.2], [10.0, 70.0, 70.0, 90.0, 5.0]],
        Kind::Continuous,
    )?;
    let norm = normalize(&raw, NormalizationSpec::for_kind(Kind::Continuous))?;
    println!("normalized:\n{:.3}", norm.matrix.values());

    let truth = GroundTruth::from_u8(&[0, 1, 0, 1, 0]);
    // the second rater's tie at the boundary (Q2, Q3) is broken by the seed
    for seed in [1, 4] {
        let b = perfect_binarize(&raw, &truth, seed)?;
        println!("binarized with seed {seed}:\n{}", b.values());
    }
    Ok(())
}
