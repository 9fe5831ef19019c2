//! Labeled sample matrices and the per-group statistics derived from them.
//!
//! Samples are stored row-wise (`n x p`). Group labels are remapped to
//! contiguous ids `0..G` in order of first appearance; the original names are
//! retained for reporting. Centered data is stored feature-major (`p x n`)
//! because every downstream computation walks features within a sample.

use ndarray::{Array1, Array2, Axis};

use crate::error::CrdaError;

/// A labeled data matrix: `n` samples (rows) by `p` features (columns).
#[derive(Debug, Clone)]
pub struct LabeledDataset {
    x: Array2<f64>,
    labels: Vec<usize>,
    label_names: Vec<String>,
    feature_names: Option<Vec<String>>,
}

impl LabeledDataset {
    /// Builds a dataset from a matrix and already-contiguous group ids.
    ///
    /// `label_names[g]` names group `g`. Every group in `0..label_names.len()`
    /// must own at least one sample and every matrix entry must be finite.
    pub fn from_parts(
        x: Array2<f64>,
        labels: Vec<usize>,
        label_names: Vec<String>,
        feature_names: Option<Vec<String>>,
    ) -> Result<Self, CrdaError> {
        let n = x.nrows();
        let p = x.ncols();
        if n == 0 {
            return Err(CrdaError::EmptyDataset);
        }
        if p == 0 {
            return Err(CrdaError::NoFeatures);
        }
        if labels.len() != n {
            return Err(CrdaError::LabelCountMismatch {
                rows: n,
                labels: labels.len(),
            });
        }
        if let Some(names) = &feature_names {
            if names.len() != p {
                return Err(CrdaError::DimensionMismatch {
                    context: "feature name count",
                    expected: p,
                    found: names.len(),
                });
            }
        }
        let n_groups = label_names.len();
        let mut counts = vec![0usize; n_groups];
        for &g in &labels {
            if g >= n_groups {
                return Err(CrdaError::DimensionMismatch {
                    context: "group id",
                    expected: n_groups,
                    found: g,
                });
            }
            counts[g] += 1;
        }
        if let Some(g) = counts.iter().position(|&c| c == 0) {
            return Err(CrdaError::EmptyGroup {
                label: label_names[g].clone(),
            });
        }
        if !x.iter().all(|v| v.is_finite()) {
            return Err(CrdaError::NonFinite {
                context: "data matrix",
            });
        }
        Ok(Self {
            x,
            labels,
            label_names,
            feature_names,
        })
    }

    /// Builds a dataset from raw string labels, assigning ids in order of
    /// first appearance.
    pub fn from_raw_labels(
        x: Array2<f64>,
        raw_labels: &[String],
        feature_names: Option<Vec<String>>,
    ) -> Result<Self, CrdaError> {
        let mut label_names: Vec<String> = Vec::new();
        let mut labels = Vec::with_capacity(raw_labels.len());
        for raw in raw_labels {
            let id = match label_names.iter().position(|name| name == raw) {
                Some(id) => id,
                None => {
                    label_names.push(raw.clone());
                    label_names.len() - 1
                }
            };
            labels.push(id);
        }
        Self::from_parts(x, labels, label_names, feature_names)
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn n_groups(&self) -> usize {
        self.label_names.len()
    }

    pub fn x(&self) -> &Array2<f64> {
        &self.x
    }

    /// Contiguous group id of each sample.
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Original group names, indexed by contiguous id.
    pub fn label_names(&self) -> &[String] {
        &self.label_names
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    /// Number of samples in each group.
    pub fn group_sizes(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.n_groups()];
        for &g in &self.labels {
            counts[g] += 1;
        }
        counts
    }

    /// Sample indices of each group, in row order.
    pub fn group_indices(&self) -> Vec<Vec<usize>> {
        let mut idx: Vec<Vec<usize>> = vec![Vec::new(); self.n_groups()];
        for (i, &g) in self.labels.iter().enumerate() {
            idx[g].push(i);
        }
        idx
    }

    /// Returns the dataset restricted to the given sample rows.
    ///
    /// Every group must survive the restriction.
    pub fn subset(&self, rows: &[usize]) -> Result<Self, CrdaError> {
        let x = self.x.select(Axis(0), rows);
        let labels: Vec<usize> = rows.iter().map(|&i| self.labels[i]).collect();
        Self::from_parts(
            x,
            labels,
            self.label_names.clone(),
            self.feature_names.clone(),
        )
    }
}

/// Per-group mean vectors (`p x G`) with group counts and proportions.
#[derive(Debug, Clone)]
pub struct ClassMeans {
    means: Array2<f64>,
    counts: Vec<usize>,
    proportions: Array1<f64>,
}

impl ClassMeans {
    /// Mean matrix, one column per group.
    pub fn matrix(&self) -> &Array2<f64> {
        &self.means
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Group sample proportions `n_g / n`.
    pub fn proportions(&self) -> &Array1<f64> {
        &self.proportions
    }

    pub fn p(&self) -> usize {
        self.means.nrows()
    }

    pub fn n_groups(&self) -> usize {
        self.means.ncols()
    }

    pub(crate) fn from_stored(means: Array2<f64>, counts: Vec<usize>) -> Self {
        let n: usize = counts.iter().sum();
        let proportions = Array1::from_iter(counts.iter().map(|&c| c as f64 / n as f64));
        Self {
            means,
            counts,
            proportions,
        }
    }
}

/// Computes the per-group sample means of `ds`.
pub fn class_means(ds: &LabeledDataset) -> ClassMeans {
    let p = ds.p();
    let g = ds.n_groups();
    let mut means = Array2::<f64>::zeros((p, g));
    let counts = ds.group_sizes();
    for (i, &gi) in ds.labels().iter().enumerate() {
        let row = ds.x().row(i);
        let mut col = means.column_mut(gi);
        col += &row.t();
    }
    for gi in 0..g {
        let mut col = means.column_mut(gi);
        col /= counts[gi] as f64;
    }
    let n = ds.n() as f64;
    let proportions = Array1::from_iter(counts.iter().map(|&c| c as f64 / n));
    ClassMeans {
        means,
        counts,
        proportions,
    }
}

/// Group-wise centered data, stored feature-major (`p x n`).
#[derive(Debug, Clone)]
pub struct CenteredData {
    xc: Array2<f64>,
    labels: Vec<usize>,
    n_groups: usize,
}

impl CenteredData {
    /// Wraps an already-centered matrix. Internal: callers own the centering
    /// claim, so this stays crate-private (tests, synthetic factors).
    #[cfg(test)]
    pub(crate) fn from_matrix(xc: Array2<f64>) -> Self {
        let n = xc.ncols();
        Self {
            xc,
            labels: vec![0; n],
            n_groups: 1,
        }
    }

    /// Centered matrix; column `j` is sample `j` minus its group mean.
    pub fn matrix(&self) -> &Array2<f64> {
        &self.xc
    }

    pub fn p(&self) -> usize {
        self.xc.nrows()
    }

    pub fn n(&self) -> usize {
        self.xc.ncols()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn n_groups(&self) -> usize {
        self.n_groups
    }
}

/// Re-expresses a dataset's group indices in another label ordering,
/// matching by name.
pub(crate) fn map_label_indices(
    target_names: &[String],
    ds: &LabeledDataset,
) -> Result<Vec<usize>, CrdaError> {
    ds.labels()
        .iter()
        .map(|&l| {
            let name = &ds.label_names()[l];
            target_names
                .iter()
                .position(|t| t == name)
                .ok_or_else(|| CrdaError::UnknownLabel {
                    label: name.clone(),
                })
        })
        .collect()
}

/// Subtracts each sample's group mean, returning the transposed (`p x n`)
/// centered matrix.
pub fn center_by_class(ds: &LabeledDataset, means: &ClassMeans) -> Result<CenteredData, CrdaError> {
    if means.p() != ds.p() {
        return Err(CrdaError::DimensionMismatch {
            context: "mean vector length",
            expected: ds.p(),
            found: means.p(),
        });
    }
    if means.n_groups() != ds.n_groups() {
        return Err(CrdaError::DimensionMismatch {
            context: "mean group count",
            expected: ds.n_groups(),
            found: means.n_groups(),
        });
    }
    let n = ds.n();
    let p = ds.p();
    let mut xc = Array2::<f64>::zeros((p, n));
    for (j, &g) in ds.labels().iter().enumerate() {
        let sample = ds.x().row(j);
        let mean = means.matrix().column(g);
        let mut col = xc.column_mut(j);
        for i in 0..p {
            col[i] = sample[i] - mean[i];
        }
    }
    Ok(CenteredData {
        xc,
        labels: ds.labels().to_vec(),
        n_groups: ds.n_groups(),
    })
}
