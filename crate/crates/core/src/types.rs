//! Domain types shared by every stage of the pipeline.
//!
//! A [`ResponseMatrix`] stores individuals in rows and questions in columns,
//! so `values[[j, i]]` is individual `j`'s answer to question `i`.

use std::collections::HashSet;
use std::fmt;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{CrowdError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Continuous,
    Binary,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kind::Continuous => write!(f, "continuous"),
            Kind::Binary => write!(f, "binary"),
        }
    }
}

impl std::str::FromStr for Kind {
    type Err = CrowdError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "continuous" => Ok(Kind::Continuous),
            "binary" => Ok(Kind::Binary),
            other => Err(CrowdError::InvalidKind(format!("unknown kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResponseMatrix {
    values: Array2<f64>,
    individual_ids: Vec<String>,
    question_ids: Vec<String>,
    kind: Kind,
}

impl ResponseMatrix {
    /// Builds a matrix without checking any invariant. Use
    /// [`validate_dataset`] or [`ResponseMatrix::try_new`] when the input is
    /// untrusted.
    pub fn from_parts(
        values: Array2<f64>,
        individual_ids: Vec<String>,
        question_ids: Vec<String>,
        kind: Kind,
    ) -> Self {
        Self {
            values,
            individual_ids,
            question_ids,
            kind,
        }
    }

    pub fn try_new(
        values: Array2<f64>,
        individual_ids: Vec<String>,
        question_ids: Vec<String>,
        kind: Kind,
    ) -> Result<Self> {
        let m = Self::from_parts(values, individual_ids, question_ids, kind);
        let report = validate_dataset(&m, None, None);
        if report.is_empty() {
            Ok(m)
        } else {
            Err(CrowdError::Validation(report))
        }
    }

    /// Validated constructor with generated ids `I1..Ik` and `Q1..Qn`.
    pub fn with_default_ids(values: Array2<f64>, kind: Kind) -> Result<Self> {
        let (k, n) = values.dim();
        Self::try_new(values, default_ids("I", k), default_ids("Q", n), kind)
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn individual_ids(&self) -> &[String] {
        &self.individual_ids
    }

    pub fn question_ids(&self) -> &[String] {
        &self.question_ids
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn n_individuals(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_questions(&self) -> usize {
        self.values.ncols()
    }

    /// Same ids, new values and kind.
    pub fn with_values(&self, values: Array2<f64>, kind: Kind) -> Self {
        debug_assert_eq!(values.dim(), self.values.dim());
        Self {
            values,
            individual_ids: self.individual_ids.clone(),
            question_ids: self.question_ids.clone(),
            kind,
        }
    }

    /// Per-question mean response across individuals.
    pub fn question_means(&self) -> Vec<f64> {
        let k = self.n_individuals() as f64;
        self.values
            .columns()
            .into_iter()
            .map(|c| c.sum() / k)
            .collect()
    }

    /// Restricts the matrix to the given questions, in the given order.
    pub fn select_questions(&self, idx: &[usize]) -> Self {
        let values = self.values.select(ndarray::Axis(1), idx);
        Self {
            values,
            individual_ids: self.individual_ids.clone(),
            question_ids: idx.iter().map(|&i| self.question_ids[i].clone()).collect(),
            kind: self.kind,
        }
    }
}

pub fn default_ids(prefix: &str, count: usize) -> Vec<String> {
    (1..=count).map(|i| format!("{prefix}{i}")).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruth {
    pub labels: Vec<bool>,
}

impl GroundTruth {
    pub fn new(labels: Vec<bool>) -> Self {
        Self { labels }
    }

    pub fn from_u8(labels: &[u8]) -> Self {
        Self::new(labels.iter().map(|&l| l != 0).collect())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn positives(&self) -> usize {
        self.labels.iter().filter(|&&l| l).count()
    }

    pub fn negatives(&self) -> usize {
        self.len() - self.positives()
    }

    pub fn has_both_classes(&self) -> bool {
        let p = self.positives();
        p > 0 && p < self.len()
    }

    pub fn require_both_classes(&self) -> Result<()> {
        if self.has_both_classes() {
            Ok(())
        } else {
            Err(CrowdError::ClassPresence {
                positives: self.positives(),
                negatives: self.negatives(),
            })
        }
    }

    pub fn select(&self, idx: &[usize]) -> Self {
        Self::new(idx.iter().map(|&i| self.labels[i]).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassProbabilities {
    pub probs: Vec<f64>,
}

impl ClassProbabilities {
    pub fn new(probs: Vec<f64>) -> Self {
        Self { probs }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    AsComputed,
    Flipped,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::AsComputed => 1.0,
            Orientation::Flipped => -1.0,
        }
    }

    pub fn toggled(self) -> Self {
        match self {
            Orientation::AsComputed => Orientation::Flipped,
            Orientation::Flipped => Orientation::AsComputed,
        }
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Orientation::AsComputed => write!(f, "as_computed"),
            Orientation::Flipped => write!(f, "flipped"),
        }
    }
}

impl std::str::FromStr for Orientation {
    type Err = CrowdError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "as_computed" => Ok(Orientation::AsComputed),
            "flipped" => Ok(Orientation::Flipped),
            other => Err(CrowdError::InvalidArgument(format!(
                "unknown orientation {other:?}"
            ))),
        }
    }
}

/// One consensus score per question.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector {
    pub scores: Vec<f64>,
    pub orientation: Orientation,
    pub method_tag: String,
    pub warnings: Vec<String>,
}

impl ScoreVector {
    pub fn new(scores: Vec<f64>, method_tag: impl Into<String>) -> Self {
        Self {
            scores,
            orientation: Orientation::AsComputed,
            method_tag: method_tag.into(),
            warnings: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn negated(&self) -> Self {
        Self {
            scores: self.scores.iter().map(|s| -s).collect(),
            orientation: self.orientation.toggled(),
            method_tag: self.method_tag.clone(),
            warnings: self.warnings.clone(),
        }
    }

    pub fn select(&self, idx: &[usize]) -> Self {
        Self {
            scores: idx.iter().map(|&i| self.scores[i]).collect(),
            orientation: self.orientation,
            method_tag: self.method_tag.clone(),
            warnings: self.warnings.clone(),
        }
    }
}

/// Which side of the matrix a violation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Individuals,
    Questions,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axis::Individuals => write!(f, "individuals"),
            Axis::Questions => write!(f, "questions"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum Violation {
    NonFinite {
        row: usize,
        col: usize,
    },
    NotBinary {
        row: usize,
        col: usize,
        value: f64,
    },
    TooFewIndividuals {
        found: usize,
        min: usize,
    },
    TooFewQuestions {
        found: usize,
        min: usize,
    },
    IdCount {
        axis: Axis,
        expected: usize,
        found: usize,
    },
    DuplicateId {
        axis: Axis,
        index: usize,
        id: String,
    },
    LengthMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    SingleClassLabels {
        positives: usize,
        negatives: usize,
    },
    ProbabilityOutOfRange {
        index: usize,
        value: f64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonFinite { row, col } => {
                write!(f, "non-finite value at (row {row}, column {col})")
            }
            Violation::NotBinary { row, col, value } => {
                write!(
                    f,
                    "binary matrix holds {value} at (row {row}, column {col})"
                )
            }
            Violation::TooFewIndividuals { found, min } => {
                write!(f, "{found} individuals, need at least {min}")
            }
            Violation::TooFewQuestions { found, min } => {
                write!(f, "{found} questions, need at least {min}")
            }
            Violation::IdCount {
                axis,
                expected,
                found,
            } => write!(f, "{axis}: expected {expected} ids, found {found}"),
            Violation::DuplicateId { axis, index, id } => {
                write!(f, "{axis}: duplicate id {id:?} at index {index}")
            }
            Violation::LengthMismatch {
                what,
                expected,
                found,
            } => write!(f, "{what}: expected length {expected}, found {found}"),
            Violation::SingleClassLabels {
                positives,
                negatives,
            } => write!(
                f,
                "single-class labels ({positives} positives, {negatives} negatives)"
            ),
            Violation::ProbabilityOutOfRange { index, value } => {
                write!(
                    f,
                    "class probability {value} at index {index} outside [0, 1]"
                )
            }
        }
    }
}

pub const MIN_INDIVIDUALS: usize = 2;
pub const MIN_QUESTIONS: usize = 3;

/// Reports every violated invariant of the dataset; an empty report means the
/// dataset is usable by every downstream operation.
pub fn validate_dataset(
    matrix: &ResponseMatrix,
    truth: Option<&GroundTruth>,
    probs: Option<&ClassProbabilities>,
) -> Vec<Violation> {
    let mut out = Vec::new();
    let (k, n) = matrix.values.dim();

    for ((row, col), &v) in matrix.values.indexed_iter() {
        if !v.is_finite() {
            out.push(Violation::NonFinite { row, col });
        } else if matrix.kind == Kind::Binary && v != 0.0 && v != 1.0 {
            out.push(Violation::NotBinary { row, col, value: v });
        }
    }
    if k < MIN_INDIVIDUALS {
        out.push(Violation::TooFewIndividuals {
            found: k,
            min: MIN_INDIVIDUALS,
        });
    }
    if n < MIN_QUESTIONS {
        out.push(Violation::TooFewQuestions {
            found: n,
            min: MIN_QUESTIONS,
        });
    }
    check_ids(&mut out, Axis::Individuals, &matrix.individual_ids, k);
    check_ids(&mut out, Axis::Questions, &matrix.question_ids, n);

    if let Some(t) = truth {
        if t.len() != n {
            out.push(Violation::LengthMismatch {
                what: "truth labels",
                expected: n,
                found: t.len(),
            });
        }
        if !t.has_both_classes() {
            out.push(Violation::SingleClassLabels {
                positives: t.positives(),
                negatives: t.negatives(),
            });
        }
    }
    if let Some(p) = probs {
        if p.probs.len() != n {
            out.push(Violation::LengthMismatch {
                what: "class probabilities",
                expected: n,
                found: p.probs.len(),
            });
        }
        for (index, &value) in p.probs.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                out.push(Violation::ProbabilityOutOfRange { index, value });
            }
        }
    }
    out
}

fn check_ids(out: &mut Vec<Violation>, axis: Axis, ids: &[String], expected: usize) {
    if ids.len() != expected {
        out.push(Violation::IdCount {
            axis,
            expected,
            found: ids.len(),
        });
    }
    let mut seen = HashSet::new();
    for (index, id) in ids.iter().enumerate() {
        if !seen.insert(id.as_str()) {
            out.push(Violation::DuplicateId {
                axis,
                index,
                id: id.clone(),
            });
        }
    }
}
