use thiserror::Error;

use crate::types::Violation;

pub type Result<T> = std::result::Result<T, CrowdError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CrowdError {
    #[error("invalid matrix kind: {0}")]
    InvalidKind(String),

    #[error("dataset failed validation: {}", format_violations(.0))]
    Validation(Vec<Violation>),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate truth: {positives} positives out of {n} questions")]
    DegenerateTruth { positives: usize, n: usize },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("matrix is not positive definite: non-positive pivot {value:e} at index {index}")]
    Singular { index: usize, value: f64 },

    #[error("neighbor graph is disconnected (component sizes {component_sizes:?}); try a larger neighbor count")]
    Disconnected { component_sizes: Vec<usize> },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("labels must contain both classes ({positives} positives, {negatives} negatives)")]
    ClassPresence { positives: usize, negatives: usize },

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),

    #[error("sampling budget exhausted after {draws} draws ({yes} of {yes_target} yes, {no} of {no_target} no)")]
    SamplingBudget {
        draws: usize,
        yes: usize,
        yes_target: usize,
        no: usize,
        no_target: usize,
    },

    #[error("split infeasible: {0}")]
    SplitInfeasible(String),

    #[error("excluded replicate: {0}")]
    Excluded(String),

    #[error("{path}: {message}")]
    Io { path: String, message: String },

    #[error("{path}: {message}")]
    Parse { path: String, message: String },

    #[error("question ids do not align: {0}")]
    Alignment(String),
}

impl CrowdError {
    /// Process exit code: 2 validation, 3 numerical or connectivity, 4 I/O,
    /// 5 alignment.
    pub fn exit_code(&self) -> i32 {
        use CrowdError::*;
        match self {
            InvalidKind(_)
            | Validation(_)
            | InvalidArgument(_)
            | DegenerateTruth { .. }
            | Contract(_)
            | ClassPresence { .. }
            | SplitInfeasible(_)
            | Parse { .. } => 2,
            Singular { .. }
            | Disconnected { .. }
            | Degenerate(_)
            | Numerical(_)
            | UndefinedCorrelation(_)
            | SamplingBudget { .. }
            | Excluded(_) => 3,
            Io { .. } => 4,
            Alignment(_) => 5,
        }
    }
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
