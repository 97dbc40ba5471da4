//! Crowd-wisdom aggregators: each maps a normalized response matrix to one
//! consensus score per question.
//!
//! [`aggregate`] dispatches on an [`AggregatorSpec`] and orients the result
//! with [`align_to_majority`]. The per-method functions return scores in the
//! orientation their numerics produce. [`consensus`] is the convenience entry
//! point for raw input: it applies the normalization protocol that matches the
//! input kind and then aggregates.

mod factor;
mod manifold;
mod neighbors;
mod pca;
mod simple;
mod sml;

pub use factor::{factor_analysis, factor_analysis_scores, FactorFit};
pub use manifold::{isomap_scores, lle_scores, lle_weights, mds_scores, spectral_scores};
pub use neighbors::{knn_graph, nearest_neighbors};
pub use pca::{pca, pca_scores, PcaFit};
pub use simple::{mean_scores, median_scores};
pub use sml::{sml, sml_predict, sml_scores, SmlFit};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{CrowdError, Result};
use crate::preprocess::{normalize, NormalizationSpec};
use crate::types::{Kind, ResponseMatrix, ScoreVector};

/// Neighbor counts swept by the nearest-neighbor methods.
pub const DEFAULT_NEIGHBORS: [usize; 8] = [5, 7, 10, 15, 25, 40, 60, 90];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Mean,
    Median,
    Pca,
    FactorAnalysis,
    Mds,
    Isomap,
    Lle,
    Spectral,
    Sml,
}

impl Method {
    pub const ALL: [Method; 9] = [
        Method::Mean,
        Method::Median,
        Method::Pca,
        Method::FactorAnalysis,
        Method::Mds,
        Method::Isomap,
        Method::Lle,
        Method::Spectral,
        Method::Sml,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Mean => "mean",
            Method::Median => "median",
            Method::Pca => "pca",
            Method::FactorAnalysis => "fa",
            Method::Mds => "mds",
            Method::Isomap => "isomap",
            Method::Lle => "lle",
            Method::Spectral => "spectral",
            Method::Sml => "sml",
        }
    }

    pub fn needs_neighbors(self) -> bool {
        matches!(self, Method::Isomap | Method::Lle | Method::Spectral)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = CrowdError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .or(match s.as_str() {
                "factor_analysis" => Some(Method::FactorAnalysis),
                _ => None,
            })
            .ok_or_else(|| CrowdError::InvalidArgument(format!("unknown method {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AggregatorSpec {
    pub method: Method,
    pub n_neighbors: Option<usize>,
}

impl AggregatorSpec {
    pub fn new(method: Method) -> Self {
        Self {
            method,
            n_neighbors: None,
        }
    }

    pub fn with_neighbors(method: Method, n_neighbors: usize) -> Self {
        Self {
            method,
            n_neighbors: Some(n_neighbors),
        }
    }

    /// Every method, with the nearest-neighbor methods expanded over
    /// [`DEFAULT_NEIGHBORS`] values below `n_questions`.
    pub fn default_grid(n_questions: usize, include_sml: bool) -> Vec<Self> {
        let mut out = Vec::new();
        for m in Method::ALL {
            if m == Method::Sml && !include_sml {
                continue;
            }
            if m.needs_neighbors() {
                out.extend(
                    DEFAULT_NEIGHBORS
                        .iter()
                        .filter(|&&k| k < n_questions)
                        .map(|&k| Self::with_neighbors(m, k)),
                );
            } else {
                out.push(Self::new(m));
            }
        }
        out
    }

    /// `pca`, `isomap(10)`, ...
    pub fn tag(&self) -> String {
        match self.n_neighbors {
            Some(k) if self.method.needs_neighbors() => format!("{}({k})", self.method),
            _ => self.method.to_string(),
        }
    }

    pub fn validate(&self, n_questions: usize) -> Result<()> {
        match (self.method.needs_neighbors(), self.n_neighbors) {
            (true, None) => Err(CrowdError::InvalidArgument(format!(
                "{} requires a neighbor count",
                self.method
            ))),
            (true, Some(k)) if k >= n_questions => Err(CrowdError::InvalidArgument(format!(
                "{} neighbors must be fewer than the {n_questions} questions",
                k
            ))),
            (true, Some(k)) if k < 1 || (self.method == Method::Lle && k < 2) => {
                Err(CrowdError::InvalidArgument(format!(
                    "{} needs more neighbors than {k}",
                    self.method
                )))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for AggregatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tag())
    }
}

/// Parses `pca`, `isomap:10` or `isomap(10)`.
impl FromStr for AggregatorSpec {
    type Err = CrowdError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, k) = if let Some((name, rest)) = s.split_once(':') {
            (name, Some(rest))
        } else if let Some((name, rest)) = s.split_once('(') {
            (name, Some(rest.trim_end_matches(')')))
        } else {
            (s, None)
        };
        let method: Method = name.parse()?;
        let n_neighbors = k
            .map(|k| {
                k.trim().parse::<usize>().map_err(|_| {
                    CrowdError::InvalidArgument(format!("bad neighbor count in {s:?}"))
                })
            })
            .transpose()?;
        Ok(Self {
            method,
            n_neighbors,
        })
    }
}

/// Runs one aggregator on a normalized matrix (binary 0/1 matrix for SML) and
/// orients the result toward the crowd majority.
pub fn aggregate(matrix: &ResponseMatrix, spec: &AggregatorSpec) -> Result<ScoreVector> {
    spec.validate(matrix.n_questions())?;
    let k = || spec.n_neighbors.expect("validated");
    let mut scores = match spec.method {
        Method::Mean => mean_scores(matrix),
        Method::Median => median_scores(matrix),
        Method::Pca => pca_scores(matrix)?,
        Method::FactorAnalysis => factor_analysis_scores(matrix)?,
        Method::Mds => mds_scores(matrix)?,
        Method::Isomap => isomap_scores(matrix, k())?,
        Method::Lle => lle_scores(matrix, k())?,
        Method::Spectral => spectral_scores(matrix, k())?,
        Method::Sml => sml_scores(matrix)?,
    };
    scores.method_tag = spec.tag();
    if let Some(bad) = scores.scores.iter().position(|s| !s.is_finite()) {
        return Err(CrowdError::Numerical(format!(
            "{} produced a non-finite score at question {bad}",
            spec.tag()
        )));
    }
    Ok(align_to_majority(&scores, matrix))
}

/// Normalizes raw responses according to their kind, then aggregates. SML
/// consumes the raw binary matrix directly.
pub fn consensus(raw: &ResponseMatrix, spec: &AggregatorSpec) -> Result<ScoreVector> {
    if spec.method == Method::Sml {
        return aggregate(raw, spec);
    }
    let normalized = normalize(raw, NormalizationSpec::for_kind(raw.kind()))?;
    let mut out = aggregate(&normalized.matrix, spec)?;
    out.warnings.splice(0..0, normalized.warnings);
    Ok(out)
}

pub(crate) fn require_kind(matrix: &ResponseMatrix, kind: Kind, who: &str) -> Result<()> {
    if matrix.kind() != kind {
        return Err(CrowdError::InvalidKind(format!(
            "{who} requires a {kind} matrix, got {}",
            matrix.kind()
        )));
    }
    Ok(())
}

pub(crate) fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        None
    } else {
        Some(sab / (saa.sqrt() * sbb.sqrt()))
    }
}

/// Negates the scores iff they correlate negatively with the per-question
/// mean response. Zero correlation keeps the scores as computed.
pub fn align_to_majority(scores: &ScoreVector, matrix: &ResponseMatrix) -> ScoreVector {
    let means = matrix.question_means();
    match pearson(&scores.scores, &means) {
        Some(r) if r < 0.0 => scores.negated(),
        Some(_) => scores.clone(),
        None => {
            let mut out = scores.clone();
            out.warnings.push(format!(
                "{}: orientation left unchanged, correlation with the crowd mean is undefined",
                scores.method_tag
            ));
            out
        }
    }
}

/// Marks the `n_positive` largest scores as positive; ties at the boundary go
/// to the lowest question index.
pub fn threshold_scores(scores: &[f64], n_positive: usize) -> Vec<bool> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut out = vec![false; scores.len()];
    for &i in order.iter().take(n_positive) {
        out[i] = true;
    }
    out
}
