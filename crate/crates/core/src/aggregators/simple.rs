use crate::types::{ResponseMatrix, ScoreVector};

pub fn mean_scores(matrix: &ResponseMatrix) -> ScoreVector {
    ScoreVector::new(matrix.question_means(), "mean")
}

pub fn median_scores(matrix: &ResponseMatrix) -> ScoreVector {
    let scores = matrix
        .values()
        .columns()
        .into_iter()
        .map(|c| {
            let mut v = c.to_vec();
            v.sort_by(f64::total_cmp);
            let m = v.len() / 2;
            if v.len() % 2 == 1 {
                v[m]
            } else {
                0.5 * (v[m - 1] + v[m])
            }
        })
        .collect();
    ScoreVector::new(scores, "median")
}
