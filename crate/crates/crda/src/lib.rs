//! Compressive regularized discriminant analysis for wide data (`p >> n`).
//!
//! The classifier shrinks the pooled sample covariance toward a scaled
//! identity, applies its inverse to the group means through a thin SVD of the
//! `n x n` Gram matrix (the `p x p` covariance is never formed), and keeps
//! only the coefficient rows that matter: the `K` rows of largest `l_q` norm.
//! Zeroed rows drop their features from the rule entirely, so training
//! doubles as joint feature selection. Cross-validated model selection, the
//! elementwise soft-threshold variant, synthetic data generators, and
//! selection-quality metrics round out the toolkit.
//!
//! ```
//! use crda::{train, LabeledDataset, RowNorm};
//! use ndarray::array;
//!
//! let x = array![
//!     [1.0, 0.1, 0.05],
//!     [0.9, -0.1, -0.02],
//!     [-1.0, 0.2, 0.04],
//!     [-1.1, 0.0, -0.03],
//! ];
//! let labels: Vec<String> = ["a", "a", "b", "b"].iter().map(|s| s.to_string()).collect();
//! let ds = LabeledDataset::from_raw_labels(x, &labels, None).unwrap();
//! let model = train(&ds, 0.5, 1, RowNorm::LInf, None).unwrap();
//! // Only the first feature separates the groups.
//! assert_eq!(model.selected_features(), &[0]);
//! let preds = model.predict(&array![[1.2, 0.0, 5.0]]).unwrap();
//! assert_eq!(model.label_names()[preds[0]], "a");
//! ```

pub mod classifier;
pub mod covariance;
pub mod dataset;
pub mod error;
pub mod io;
mod linalg;
pub mod metrics;
pub mod model_selection;
pub mod simulation;
#[cfg(test)]
pub(crate) mod testsupport;

pub use classifier::{
    coefficient_matrix, equal_priors, hard_threshold, row_norms, soft_threshold, train,
    train_with, CoefficientMatrix, RowNorm, Shrinkage, TrainedModel,
};
pub use covariance::{
    ledoit_wolf_alpha, thin_svd_via_gram, RegularizedCovariance, SvdFactors, ALPHA_MAX,
    DEFAULT_RANK_TOL,
};
pub use dataset::{center_by_class, class_means, CenteredData, ClassMeans, LabeledDataset};
pub use error::CrdaError;
pub use io::{
    load_csv, load_matrix_csv, load_model, load_transposed_csv, load_transposed_matrix_csv,
    read_truth, save_csv, save_model, save_transposed_csv, write_truth, DEFAULT_LABEL_COLUMN,
    MODEL_FORMAT_VERSION,
};
pub use metrics::{dr_fp, evaluate, mean_std, nfs, test_error, EvalResult};
pub use model_selection::{
    cv_error, default_alphas, default_ks, grid_search, holdout_search, light_search, make_folds,
    select_pair, soft_holdout_search, soft_search, CvReport, Grid, Selection, SoftReport,
    SOFT_DELTA_COUNT,
};
pub use simulation::{
    ar1_block, cov_setup3, generate, means_setup1, means_setup2, means_setup3, sample_mvn,
    CovarianceModel, GeneratedTrial, SetupId, SetupSpec,
};
