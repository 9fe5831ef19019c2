//! Error type shared by every module in the crate.

use thiserror::Error;

/// Errors produced while loading data, fitting, or generating samples.
#[derive(Debug, Error)]
pub enum CrdaError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("row {row}, column {column}: cannot parse {value:?} as a finite number")]
    NonNumericCell {
        row: usize,
        column: usize,
        value: String,
    },

    #[error("row {row} has {found} fields, expected {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("label column {name:?} not found in header")]
    MissingLabelColumn { name: String },

    #[error("label file has {labels} entries for {rows} samples")]
    LabelCountMismatch { rows: usize, labels: usize },

    #[error("dataset has no samples")]
    EmptyDataset,

    #[error("dataset has no features")]
    NoFeatures,

    #[error("group {label:?} has no samples")]
    EmptyGroup { label: String },

    #[error("{context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("shrinkage weight alpha must lie in [0, 1), got {alpha}")]
    InvalidAlpha { alpha: f64 },

    #[error("rank tolerance must lie in [0, 1), got {tol}")]
    InvalidRankTol { tol: f64 },

    #[error("sparsity level K must lie in [1, {p}], got {k}")]
    InvalidSparsity { k: usize, p: usize },

    #[error("soft threshold must be finite and nonnegative, got {delta}")]
    InvalidDelta { delta: f64 },

    #[error("invalid priors: {reason}")]
    InvalidPriors { reason: String },

    #[error("fold count {folds} invalid for {n} samples (need 2 <= folds <= n)")]
    InvalidFolds { folds: usize, n: usize },

    #[error("training complement of fold {fold} contains no samples of group {group}")]
    FoldWithoutGroup { fold: usize, group: usize },

    #[error("grid is empty")]
    EmptyGrid,

    #[error("invalid grid: {reason}")]
    InvalidGrid { reason: String },

    #[error("label {label:?} does not occur in the training data")]
    UnknownLabel { label: String },

    #[error("AR(1) correlation must satisfy |rho| < 1, got {rho}")]
    InvalidRho { rho: f64 },

    #[error("scale factor must be positive and finite, got {scale}")]
    InvalidScale { scale: f64 },

    #[error("covariance block {block} is not positive semidefinite")]
    NotPositiveDefinite { block: usize },

    #[error("true feature set is empty")]
    EmptyTruth,

    #[error("model file: {message}")]
    ModelFormat { message: String },

    #[error("centered data has rank zero")]
    ZeroRank,

    #[error("non-finite value encountered in {context}")]
    NonFinite { context: &'static str },
}

impl CrdaError {
    /// True for failures of the numeric pipeline rather than of the input data.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            CrdaError::ZeroRank
                | CrdaError::NonFinite { .. }
                | CrdaError::NotPositiveDefinite { .. }
        )
    }
}
