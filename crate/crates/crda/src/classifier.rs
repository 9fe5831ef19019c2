//! The discriminant classifier with a row-sparse coefficient matrix.
//!
//! Training forms `T = Sigma^-1 M` through the factored covariance estimate,
//! then keeps either the `K` rows with the largest `l_q` norms (hard
//! thresholding, which performs joint feature selection) or the entries that
//! survive elementwise soft thresholding. A sample is assigned to the group
//! maximizing
//!
//! ```text
//! d_g(x) = xᵀ b_g - (1/2) m_gᵀ b_g + ln(pi_g)
//! ```
//!
//! with ties going to the smallest group index.

use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::covariance::{thin_svd_via_gram, RegularizedCovariance, DEFAULT_RANK_TOL};
use crate::dataset::{center_by_class, class_means, ClassMeans, LabeledDataset};
use crate::error::CrdaError;

/// Row norm used to rank features for hard thresholding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowNorm {
    L1,
    L2,
    LInf,
}

impl RowNorm {
    pub const ALL: [RowNorm; 3] = [RowNorm::L1, RowNorm::L2, RowNorm::LInf];

    pub fn label(self) -> &'static str {
        match self {
            RowNorm::L1 => "l1",
            RowNorm::L2 => "l2",
            RowNorm::LInf => "linf",
        }
    }
}

impl std::fmt::Display for RowNorm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for RowNorm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "1" | "l1" => Ok(RowNorm::L1),
            "2" | "l2" => Ok(RowNorm::L2),
            "inf" | "linf" | "max" => Ok(RowNorm::LInf),
            other => Err(format!("unknown row norm {other:?} (expected 1, 2, or inf)")),
        }
    }
}

/// How the coefficient matrix was sparsified.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Shrinkage {
    /// Keep the `k` rows of largest `l_q` norm, zero the rest.
    Hard { k: usize, norm: RowNorm },
    /// Elementwise soft threshold at `delta`.
    Soft { delta: f64 },
}

/// A `p x G` coefficient matrix together with its row support.
#[derive(Debug, Clone)]
pub struct CoefficientMatrix {
    b: Array2<f64>,
    support: Vec<usize>,
    shrinkage: Shrinkage,
}

impl CoefficientMatrix {
    pub fn matrix(&self) -> &Array2<f64> {
        &self.b
    }

    /// Rows with at least one nonzero entry, ascending.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn n_selected(&self) -> usize {
        self.support.len()
    }

    pub fn shrinkage(&self) -> Shrinkage {
        self.shrinkage
    }

    pub(crate) fn from_parts(b: Array2<f64>, shrinkage: Shrinkage) -> Self {
        let support = nonzero_rows(&b);
        Self {
            b,
            support,
            shrinkage,
        }
    }
}

fn nonzero_rows(b: &Array2<f64>) -> Vec<usize> {
    b.rows()
        .into_iter()
        .enumerate()
        .filter(|(_, row)| row.iter().any(|&v| v != 0.0))
        .map(|(i, _)| i)
        .collect()
}

/// Forms the dense pre-threshold coefficient matrix `T = Sigma^-1 M`.
pub fn coefficient_matrix(
    rc: &RegularizedCovariance,
    means: &ClassMeans,
) -> Result<Array2<f64>, CrdaError> {
    let t = rc.inverse_apply(means.matrix())?;
    if !t.iter().all(|v| v.is_finite()) {
        return Err(CrdaError::NonFinite {
            context: "coefficient matrix",
        });
    }
    Ok(t)
}

/// Per-row `l_q` norms of a coefficient matrix.
pub fn row_norms(t: &Array2<f64>, norm: RowNorm) -> Array1<f64> {
    let f = |row: ndarray::ArrayView1<f64>| -> f64 {
        match norm {
            RowNorm::L1 => row.iter().map(|v| v.abs()).sum(),
            RowNorm::L2 => row.iter().map(|v| v * v).sum::<f64>().sqrt(),
            RowNorm::LInf => row.iter().fold(0.0f64, |a, v| a.max(v.abs())),
        }
    };
    Array1::from_iter(t.rows().into_iter().map(f))
}

/// Row order for hard thresholding: descending norm, ascending index on ties.
/// The first `k` entries are exactly the rows `H_k` keeps, for every `k`.
pub(crate) fn threshold_order(norms: &Array1<f64>) -> Result<Vec<usize>, CrdaError> {
    if !norms.iter().all(|v| v.is_finite()) {
        return Err(CrdaError::NonFinite {
            context: "row norms",
        });
    }
    let mut order: Vec<usize> = (0..norms.len()).collect();
    order.sort_by(|&a, &b| norms[b].partial_cmp(&norms[a]).unwrap().then(a.cmp(&b)));
    Ok(order)
}

/// Keeps the `k` rows of largest `l_q` norm verbatim and zeroes the rest.
/// Ties at the boundary keep the smaller row index.
pub fn hard_threshold(
    t: &Array2<f64>,
    k: usize,
    norm: RowNorm,
) -> Result<CoefficientMatrix, CrdaError> {
    let p = t.nrows();
    if k == 0 || k > p {
        return Err(CrdaError::InvalidSparsity { k, p });
    }
    let norms = row_norms(t, norm);
    let order = threshold_order(&norms)?;
    let mut b = Array2::<f64>::zeros(t.raw_dim());
    for &i in &order[..k] {
        b.row_mut(i).assign(&t.row(i));
    }
    Ok(CoefficientMatrix::from_parts(
        b,
        Shrinkage::Hard { k, norm },
    ))
}

/// Elementwise soft threshold `sign(t) * max(|t| - delta, 0)`.
pub fn soft_threshold(t: &Array2<f64>, delta: f64) -> Result<CoefficientMatrix, CrdaError> {
    if !delta.is_finite() || delta < 0.0 {
        return Err(CrdaError::InvalidDelta { delta });
    }
    let b = if delta == 0.0 {
        t.to_owned()
    } else {
        t.mapv(|v| {
            let shrunk = v.abs() - delta;
            if shrunk > 0.0 {
                v.signum() * shrunk
            } else {
                0.0
            }
        })
    };
    Ok(CoefficientMatrix::from_parts(b, Shrinkage::Soft { delta }))
}

/// Equal group priors `1/G`.
pub fn equal_priors(n_groups: usize) -> Vec<f64> {
    vec![1.0 / n_groups as f64; n_groups]
}

pub(crate) fn validate_priors(priors: &[f64], n_groups: usize) -> Result<(), CrdaError> {
    if priors.len() != n_groups {
        return Err(CrdaError::InvalidPriors {
            reason: format!("expected {} entries, got {}", n_groups, priors.len()),
        });
    }
    if !priors.iter().all(|&v| v.is_finite() && v > 0.0) {
        return Err(CrdaError::InvalidPriors {
            reason: "entries must be positive and finite".into(),
        });
    }
    let sum: f64 = priors.iter().sum();
    if (sum - 1.0).abs() > 1e-8 {
        return Err(CrdaError::InvalidPriors {
            reason: format!("entries sum to {sum}, expected 1"),
        });
    }
    Ok(())
}

/// A fitted classifier: sparse coefficients plus the per-group statistics
/// needed to score new samples.
#[derive(Debug, Clone)]
pub struct TrainedModel {
    coefficients: CoefficientMatrix,
    class_means: ClassMeans,
    alpha: f64,
    log_priors: Array1<f64>,
    diag_term: Array1<f64>,
    label_names: Vec<String>,
    feature_names: Option<Vec<String>>,
}

/// Fits the classifier with hard thresholding at sparsity `k` under row
/// norm `norm`. `priors` defaults to the sample proportions.
pub fn train(
    ds: &LabeledDataset,
    alpha: f64,
    k: usize,
    norm: RowNorm,
    priors: Option<&[f64]>,
) -> Result<TrainedModel, CrdaError> {
    train_with(ds, alpha, Shrinkage::Hard { k, norm }, priors)
}

/// Fits the classifier with an explicit shrinkage rule (hard or soft).
pub fn train_with(
    ds: &LabeledDataset,
    alpha: f64,
    shrinkage: Shrinkage,
    priors: Option<&[f64]>,
) -> Result<TrainedModel, CrdaError> {
    let means = class_means(ds);
    let xc = center_by_class(ds, &means)?;
    let factors = thin_svd_via_gram(&xc, DEFAULT_RANK_TOL)?;
    let rc = RegularizedCovariance::build(&factors, alpha)?;
    let t = coefficient_matrix(&rc, &means)?;
    let coefficients = match shrinkage {
        Shrinkage::Hard { k, norm } => hard_threshold(&t, k, norm)?,
        Shrinkage::Soft { delta } => soft_threshold(&t, delta)?,
    };
    TrainedModel::assemble(
        coefficients,
        means,
        alpha,
        priors,
        ds.label_names().to_vec(),
        ds.feature_names().map(|f| f.to_vec()),
    )
}

impl TrainedModel {
    pub(crate) fn assemble(
        coefficients: CoefficientMatrix,
        class_means: ClassMeans,
        alpha: f64,
        priors: Option<&[f64]>,
        label_names: Vec<String>,
        feature_names: Option<Vec<String>>,
    ) -> Result<Self, CrdaError> {
        let g = class_means.n_groups();
        let priors_vec = match priors {
            Some(v) => {
                validate_priors(v, g)?;
                v.to_vec()
            }
            None => class_means.proportions().to_vec(),
        };
        let log_priors = Array1::from_iter(priors_vec.iter().map(|v| v.ln()));
        let diag_term = compute_diag_term(&coefficients, class_means.matrix());
        Ok(Self {
            coefficients,
            class_means,
            alpha,
            log_priors,
            diag_term,
            label_names,
            feature_names,
        })
    }

    pub(crate) fn from_stored(
        coefficients: CoefficientMatrix,
        class_means: ClassMeans,
        alpha: f64,
        log_priors: Array1<f64>,
        diag_term: Array1<f64>,
        label_names: Vec<String>,
        feature_names: Option<Vec<String>>,
    ) -> Self {
        Self {
            coefficients,
            class_means,
            alpha,
            log_priors,
            diag_term,
            label_names,
            feature_names,
        }
    }

    pub fn p(&self) -> usize {
        self.coefficients.matrix().nrows()
    }

    pub fn n_groups(&self) -> usize {
        self.coefficients.matrix().ncols()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn coefficients(&self) -> &CoefficientMatrix {
        &self.coefficients
    }

    pub fn class_means(&self) -> &ClassMeans {
        &self.class_means
    }

    pub fn log_priors(&self) -> &Array1<f64> {
        &self.log_priors
    }

    /// The per-group offset `(1/2) m_gᵀ b_g`.
    pub fn diag_term(&self) -> &Array1<f64> {
        &self.diag_term
    }

    pub fn label_names(&self) -> &[String] {
        &self.label_names
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    /// Indices of the features the model actually uses, ascending.
    pub fn selected_features(&self) -> &[usize] {
        self.coefficients.support()
    }

    /// Discriminant scores, one row per sample, one column per group.
    /// Only support rows participate: cost `O(n |support| G)`.
    pub fn discriminants(&self, x: &Array2<f64>) -> Result<Array2<f64>, CrdaError> {
        if x.ncols() != self.p() {
            return Err(CrdaError::DimensionMismatch {
                context: "test feature count",
                expected: self.p(),
                found: x.ncols(),
            });
        }
        if !x.iter().all(|v| v.is_finite()) {
            return Err(CrdaError::NonFinite {
                context: "test data",
            });
        }
        let support = self.coefficients.support();
        let offsets = &self.log_priors - &self.diag_term;
        let n = x.nrows();
        let g = self.n_groups();
        let mut scores = Array2::<f64>::zeros((n, g));
        if !support.is_empty() {
            let xs = x.select(Axis(1), support);
            let bs = self.coefficients.matrix().select(Axis(0), support);
            scores = xs.dot(&bs);
        }
        for mut row in scores.rows_mut() {
            row += &offsets;
        }
        Ok(scores)
    }

    /// Group id of the highest-scoring column per sample; ties resolve to
    /// the smallest group index.
    pub fn predict(&self, x: &Array2<f64>) -> Result<Vec<usize>, CrdaError> {
        let scores = self.discriminants(x)?;
        Ok(scores
            .rows()
            .into_iter()
            .map(|row| {
                let mut best = 0;
                for (g, &v) in row.iter().enumerate().skip(1) {
                    if v > row[best] {
                        best = g;
                    }
                }
                best
            })
            .collect())
    }

    /// Predictions mapped back to the original label names.
    pub fn predict_names(&self, x: &Array2<f64>) -> Result<Vec<&str>, CrdaError> {
        Ok(self
            .predict(x)?
            .into_iter()
            .map(|g| self.label_names[g].as_str())
            .collect())
    }
}

fn compute_diag_term(coefficients: &CoefficientMatrix, means: &Array2<f64>) -> Array1<f64> {
    let g = means.ncols();
    let mut diag = Array1::<f64>::zeros(g);
    for &i in coefficients.support() {
        for gi in 0..g {
            diag[gi] += means[[i, gi]] * coefficients.matrix()[[i, gi]];
        }
    }
    diag * 0.5
}
