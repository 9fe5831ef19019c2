//! Cross-validated choice of the shrinkage weight and the sparsity level.
//!
//! The search scores every `(alpha, K)` candidate by Q-fold cross-validation,
//! then keeps the admissible candidates (CV error at most
//! `max(0.15 * n, eps_cv)`) and picks the one selecting the fewest features.
//! A lighter strategy fixes `alpha` by the Ledoit-Wolf estimate and
//! cross-validates `K` alone, and a hold-out variant scores candidates on an
//! explicit validation set instead of folds. The soft-threshold baseline is
//! tuned the same way over per-`alpha` grids of threshold values.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::io::Write;

use crate::classifier::{
    coefficient_matrix, row_norms, threshold_order, train, validate_priors, RowNorm,
};
use crate::covariance::{
    ledoit_wolf_alpha, thin_svd_via_gram, RegularizedCovariance, DEFAULT_RANK_TOL,
};
use crate::dataset::{center_by_class, class_means, ClassMeans, LabeledDataset};
use crate::error::CrdaError;

/// Number of threshold values tried per `alpha` by the soft-threshold search.
pub const SOFT_DELTA_COUNT: usize = 25;

/// Candidate `(alpha, K)` values for the grid search.
#[derive(Debug, Clone)]
pub struct Grid {
    alphas: Vec<f64>,
    ks: Vec<usize>,
}

impl Grid {
    /// Validates the candidate sets against the feature count `p`.
    ///
    /// Alphas must be distinct values in `[0, 1)`; `ks` must be strictly
    /// increasing integers in `[1, p]`.
    pub fn new(alphas: Vec<f64>, ks: Vec<usize>, p: usize) -> Result<Self, CrdaError> {
        if alphas.is_empty() || ks.is_empty() {
            return Err(CrdaError::EmptyGrid);
        }
        validate_alphas(&alphas)?;
        for &k in &ks {
            if k == 0 || k > p {
                return Err(CrdaError::InvalidSparsity { k, p });
            }
        }
        if ks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CrdaError::InvalidGrid {
                reason: "K values must be strictly increasing".into(),
            });
        }
        Ok(Self { alphas, ks })
    }

    /// The default search space: 25 alphas uniform on `[0, 1)` and up to 100
    /// integer `K` values uniform on `[1, p]`.
    pub fn default_for(p: usize) -> Result<Self, CrdaError> {
        Self::new(default_alphas(), default_ks(p), p)
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn ks(&self) -> &[usize] {
        &self.ks
    }
}

/// 25 shrinkage weights `i/25` for `i = 0..24`.
pub fn default_alphas() -> Vec<f64> {
    (0..25).map(|i| i as f64 / 25.0).collect()
}

/// 100 integers uniform on `[1, p]`, rounded and deduplicated.
pub fn default_ks(p: usize) -> Vec<usize> {
    if p == 0 {
        return Vec::new();
    }
    let mut ks: Vec<usize> = (0..100)
        .map(|j| {
            let x = 1.0 + (p as f64 - 1.0) * j as f64 / 99.0;
            x.round() as usize
        })
        .collect();
    ks.dedup();
    ks
}

fn validate_alphas(alphas: &[f64]) -> Result<(), CrdaError> {
    if alphas.is_empty() {
        return Err(CrdaError::EmptyGrid);
    }
    for &a in alphas {
        if !a.is_finite() || !(0.0..1.0).contains(&a) {
            return Err(CrdaError::InvalidAlpha { alpha: a });
        }
    }
    let mut sorted = alphas.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(CrdaError::InvalidGrid {
            reason: "alpha values must be distinct".into(),
        });
    }
    Ok(())
}

/// Stratified fold assignment: each group's samples are shuffled and dealt
/// to folds round-robin, so per-group (and overall) fold sizes differ by at
/// most one. Deterministic for a given seed.
pub fn make_folds(labels: &[usize], folds: usize, seed: u64) -> Result<Vec<usize>, CrdaError> {
    let n = labels.len();
    if folds < 2 || folds > n {
        return Err(CrdaError::InvalidFolds { folds, n });
    }
    let n_groups = labels.iter().max().map_or(0, |m| m + 1);
    let mut by_group: Vec<Vec<usize>> = vec![Vec::new(); n_groups];
    for (row, &label) in labels.iter().enumerate() {
        by_group[label].push(row);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0usize; n];
    let mut dealt = 0usize;
    for rows in &mut by_group {
        rows.shuffle(&mut rng);
        for &row in rows.iter() {
            assignment[row] = dealt % folds;
            dealt += 1;
        }
    }
    Ok(assignment)
}

fn fold_split(
    labels: &[usize],
    fold_ids: &[usize],
    fold: usize,
    n_groups: usize,
) -> Result<(Vec<usize>, Vec<usize>), CrdaError> {
    let mut train_rows = Vec::new();
    let mut val_rows = Vec::new();
    let mut covered = vec![false; n_groups];
    for (row, (&label, &fid)) in labels.iter().zip(fold_ids).enumerate() {
        if fid == fold {
            val_rows.push(row);
        } else {
            train_rows.push(row);
            covered[label] = true;
        }
    }
    if let Some(group) = covered.iter().position(|&c| !c) {
        return Err(CrdaError::FoldWithoutGroup { fold, group });
    }
    Ok((train_rows, val_rows))
}

/// Total held-out misclassifications for one `(alpha, K)` pair, training on
/// each fold's complement. `fold_ids` assigns a fold to every sample.
pub fn cv_error(
    ds: &LabeledDataset,
    alpha: f64,
    k: usize,
    norm: RowNorm,
    fold_ids: &[usize],
    priors: Option<&[f64]>,
) -> Result<usize, CrdaError> {
    let n = ds.n();
    if fold_ids.len() != n {
        return Err(CrdaError::DimensionMismatch {
            context: "fold assignment length",
            expected: n,
            found: fold_ids.len(),
        });
    }
    let n_folds = fold_ids.iter().max().map_or(0, |m| m + 1);
    if n_folds < 2 || n_folds > n {
        return Err(CrdaError::InvalidFolds { folds: n_folds, n });
    }
    let splits = (0..n_folds)
        .map(|fold| fold_split(ds.labels(), fold_ids, fold, ds.n_groups()))
        .collect::<Result<Vec<_>, _>>()?;
    let mut total = 0usize;
    for (train_rows, val_rows) in &splits {
        if val_rows.is_empty() {
            continue;
        }
        let sub = ds.subset(train_rows)?;
        let model = train(&sub, alpha, k, norm, priors)?;
        let vx = ds.x().select(Axis(0), val_rows);
        let preds = model.predict(&vx)?;
        total += preds
            .iter()
            .zip(val_rows)
            .filter(|&(&pred, &row)| pred != ds.labels()[row])
            .count();
    }
    Ok(total)
}

/// Outcome of applying the admissibility and minimum-feature-count rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Selection {
    /// Smallest error anywhere on the grid.
    pub eps_cv: usize,
    /// Admissibility threshold `max(0.15 * n, eps_cv)`.
    pub eps_thr: f64,
    pub alpha_index: usize,
    pub sparsity_index: usize,
}

/// Picks the admissible cell with the fewest selected features.
///
/// A cell is admissible when its error is at most `max(0.15 * n, eps_cv)`;
/// the boundary comparison is done in integers (`20 * err <= 3 * n`) so no
/// rounding can flip it. Ties on the feature count fall back to smaller
/// error, then smaller `K`, then smaller `alpha`.
pub fn select_pair(
    alphas: &[f64],
    ks: &[usize],
    errors: &Array2<usize>,
    nfs: &Array2<usize>,
    n_scored: usize,
) -> Result<Selection, CrdaError> {
    if errors.dim() != (alphas.len(), ks.len()) || nfs.dim() != errors.dim() {
        return Err(CrdaError::InvalidGrid {
            reason: format!(
                "selection expects {} x {} matrices, got errors {:?} and nfs {:?}",
                alphas.len(),
                ks.len(),
                errors.dim(),
                nfs.dim()
            ),
        });
    }
    select_with_keys(errors, nfs, n_scored, |_, j| ks[j] as f64, alphas)
}

fn select_with_keys(
    errors: &Array2<usize>,
    nfs: &Array2<usize>,
    n_scored: usize,
    sparsity_key: impl Fn(usize, usize) -> f64,
    alphas: &[f64],
) -> Result<Selection, CrdaError> {
    let eps_cv = errors.iter().copied().min().ok_or(CrdaError::EmptyGrid)?;
    let mut best: Option<((usize, usize), (usize, usize, f64, f64))> = None;
    for i in 0..errors.nrows() {
        for j in 0..errors.ncols() {
            let err = errors[[i, j]];
            if !(20 * err <= 3 * n_scored || err == eps_cv) {
                continue;
            }
            let key = (nfs[[i, j]], err, sparsity_key(i, j), alphas[i]);
            let replace = match &best {
                None => true,
                Some((_, cur)) => cmp_keys(&key, cur) == std::cmp::Ordering::Less,
            };
            if replace {
                best = Some(((i, j), key));
            }
        }
    }
    let ((alpha_index, sparsity_index), _) = best.ok_or(CrdaError::EmptyGrid)?;
    Ok(Selection {
        eps_cv,
        eps_thr: (3.0 * n_scored as f64 / 20.0).max(eps_cv as f64),
        alpha_index,
        sparsity_index,
    })
}

fn cmp_keys(a: &(usize, usize, f64, f64), b: &(usize, usize, f64, f64)) -> std::cmp::Ordering {
    a.0.cmp(&b.0)
        .then(a.1.cmp(&b.1))
        .then(a.2.total_cmp(&b.2))
        .then(a.3.total_cmp(&b.3))
}

/// Cross-validation surface over `(alpha, K)` with the selected pair.
#[derive(Debug, Clone)]
pub struct CvReport {
    alphas: Vec<f64>,
    ks: Vec<usize>,
    errors: Array2<usize>,
    nfs: Array2<usize>,
    selection: Selection,
    norm: RowNorm,
    folds: usize,
    seed: u64,
    n_scored: usize,
}

impl CvReport {
    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn ks(&self) -> &[usize] {
        &self.ks
    }

    /// Held-out misclassification counts, one row per alpha.
    pub fn errors(&self) -> &Array2<usize> {
        &self.errors
    }

    /// Support sizes of the full-training-set model at each pair.
    pub fn nfs(&self) -> &Array2<usize> {
        &self.nfs
    }

    pub fn selection(&self) -> Selection {
        self.selection
    }

    pub fn eps_cv(&self) -> usize {
        self.selection.eps_cv
    }

    pub fn eps_thr(&self) -> f64 {
        self.selection.eps_thr
    }

    pub fn selected_alpha(&self) -> f64 {
        self.alphas[self.selection.alpha_index]
    }

    pub fn selected_k(&self) -> usize {
        self.ks[self.selection.sparsity_index]
    }

    pub fn selected_error(&self) -> usize {
        self.errors[[self.selection.alpha_index, self.selection.sparsity_index]]
    }

    pub fn selected_nfs(&self) -> usize {
        self.nfs[[self.selection.alpha_index, self.selection.sparsity_index]]
    }

    pub fn norm(&self) -> RowNorm {
        self.norm
    }

    pub fn folds(&self) -> usize {
        self.folds
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Sample count the admissibility threshold refers to: the training-set
    /// size under cross-validation, the validation-set size under hold-out.
    pub fn n_scored(&self) -> usize {
        self.n_scored
    }

    /// Long-format CSV (`alpha,k,error,nfs`) preceded by a `#` summary block.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<(), CrdaError> {
        writeln!(w, "# report,cv-hard")?;
        writeln!(w, "# norm,{}", self.norm)?;
        writeln!(w, "# folds,{}", self.folds)?;
        writeln!(w, "# seed,{}", self.seed)?;
        writeln!(w, "# n_scored,{}", self.n_scored)?;
        writeln!(w, "# eps_cv,{}", self.eps_cv())?;
        writeln!(w, "# eps_thr,{}", self.eps_thr())?;
        writeln!(w, "# selected_alpha,{}", self.selected_alpha())?;
        writeln!(w, "# selected_k,{}", self.selected_k())?;
        writeln!(w, "# selected_error,{}", self.selected_error())?;
        writeln!(w, "# selected_nfs,{}", self.selected_nfs())?;
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["alpha", "k", "error", "nfs"])?;
        for i in 0..self.alphas.len() {
            for j in 0..self.ks.len() {
                wtr.write_record(&[
                    self.alphas[i].to_string(),
                    self.ks[j].to_string(),
                    self.errors[[i, j]].to_string(),
                    self.nfs[[i, j]].to_string(),
                ])?;
            }
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Cross-validation surface for the soft-threshold baseline. Each alpha has
/// its own threshold grid, spread uniformly over `[0, max |t_ij|]` of the
/// full-training coefficient matrix at that alpha.
#[derive(Debug, Clone)]
pub struct SoftReport {
    alphas: Vec<f64>,
    deltas: Vec<Vec<f64>>,
    errors: Array2<usize>,
    nfs: Array2<usize>,
    selection: Selection,
    folds: usize,
    seed: u64,
    n_scored: usize,
}

impl SoftReport {
    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    /// Threshold grid for each alpha, `SOFT_DELTA_COUNT` values per row.
    pub fn deltas(&self) -> &[Vec<f64>] {
        &self.deltas
    }

    pub fn errors(&self) -> &Array2<usize> {
        &self.errors
    }

    pub fn nfs(&self) -> &Array2<usize> {
        &self.nfs
    }

    pub fn selection(&self) -> Selection {
        self.selection
    }

    pub fn eps_cv(&self) -> usize {
        self.selection.eps_cv
    }

    pub fn eps_thr(&self) -> f64 {
        self.selection.eps_thr
    }

    pub fn selected_alpha(&self) -> f64 {
        self.alphas[self.selection.alpha_index]
    }

    pub fn selected_delta(&self) -> f64 {
        self.deltas[self.selection.alpha_index][self.selection.sparsity_index]
    }

    pub fn selected_error(&self) -> usize {
        self.errors[[self.selection.alpha_index, self.selection.sparsity_index]]
    }

    pub fn selected_nfs(&self) -> usize {
        self.nfs[[self.selection.alpha_index, self.selection.sparsity_index]]
    }

    pub fn folds(&self) -> usize {
        self.folds
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn n_scored(&self) -> usize {
        self.n_scored
    }

    /// Long-format CSV (`alpha,delta,error,nfs`) preceded by a `#` summary.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<(), CrdaError> {
        writeln!(w, "# report,cv-soft")?;
        writeln!(w, "# folds,{}", self.folds)?;
        writeln!(w, "# seed,{}", self.seed)?;
        writeln!(w, "# n_scored,{}", self.n_scored)?;
        writeln!(w, "# eps_cv,{}", self.eps_cv())?;
        writeln!(w, "# eps_thr,{}", self.eps_thr())?;
        writeln!(w, "# selected_alpha,{}", self.selected_alpha())?;
        writeln!(w, "# selected_delta,{}", self.selected_delta())?;
        writeln!(w, "# selected_error,{}", self.selected_error())?;
        writeln!(w, "# selected_nfs,{}", self.selected_nfs())?;
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["alpha", "delta", "error", "nfs"])?;
        for i in 0..self.alphas.len() {
            for j in 0..self.deltas[i].len() {
                wtr.write_record(&[
                    self.alphas[i].to_string(),
                    self.deltas[i][j].to_string(),
                    self.errors[[i, j]].to_string(),
                    self.nfs[[i, j]].to_string(),
                ])?;
            }
        }
        wtr.flush()?;
        Ok(())
    }
}

fn resolve_log_priors(
    means: &ClassMeans,
    priors: Option<&[f64]>,
) -> Result<Array1<f64>, CrdaError> {
    match priors {
        Some(pr) => {
            validate_priors(pr, means.n_groups())?;
            Ok(Array1::from_iter(pr.iter().map(|v| v.ln())))
        }
        None => Ok(means.proportions().mapv(f64::ln)),
    }
}

fn count_misses(
    dots: &Array2<f64>,
    offsets: &Array1<f64>,
    log_priors: &Array1<f64>,
    val_labels: &[usize],
) -> usize {
    let g = offsets.len();
    let mut miss = 0usize;
    for (s, &truth) in val_labels.iter().enumerate() {
        let mut best = 0usize;
        let mut best_val = dots[[s, 0]] + offsets[0] + log_priors[0];
        for c in 1..g {
            let d = dots[[s, c]] + offsets[c] + log_priors[c];
            if d > best_val {
                best_val = d;
                best = c;
            }
        }
        if best != truth {
            miss += 1;
        }
    }
    miss
}

/// Scores every `(alpha, K)` on one train/validation split.
///
/// The training factorization is computed once per split and the K axis is
/// swept incrementally: rows enter the discriminants in threshold order, so
/// the whole K grid costs one pass over the coefficient matrix.
fn eval_hard_split(
    train: &LabeledDataset,
    val_x: ArrayView2<f64>,
    val_labels: &[usize],
    alphas: &[f64],
    ks: &[usize],
    norm: RowNorm,
    priors: Option<&[f64]>,
) -> Result<Array2<usize>, CrdaError> {
    let means = class_means(train);
    let xc = center_by_class(train, &means)?;
    let factors = thin_svd_via_gram(&xc, DEFAULT_RANK_TOL)?;
    let log_priors = resolve_log_priors(&means, priors)?;
    let g = means.n_groups();
    let v = val_x.nrows();
    let mut errors = Array2::zeros((alphas.len(), ks.len()));
    for (i, &alpha) in alphas.iter().enumerate() {
        let rc = RegularizedCovariance::build(&factors, alpha)?;
        let t = coefficient_matrix(&rc, &means)?;
        let order = threshold_order(&row_norms(&t, norm))?;
        let mut dots = Array2::<f64>::zeros((v, g));
        let mut offsets = Array1::<f64>::zeros(g);
        let mut added = 0usize;
        for (j, &k) in ks.iter().enumerate() {
            while added < k {
                let row = order[added];
                let t_row = t.row(row);
                let m_row = means.matrix().row(row);
                for c in 0..g {
                    offsets[c] -= 0.5 * m_row[c] * t_row[c];
                }
                for s in 0..v {
                    let xv = val_x[[s, row]];
                    for c in 0..g {
                        dots[[s, c]] += xv * t_row[c];
                    }
                }
                added += 1;
            }
            errors[[i, j]] = count_misses(&dots, &offsets, &log_priors, val_labels);
        }
    }
    Ok(errors)
}

fn eval_soft_split(
    train: &LabeledDataset,
    val_x: ArrayView2<f64>,
    val_labels: &[usize],
    alphas: &[f64],
    deltas: &[Vec<f64>],
    priors: Option<&[f64]>,
) -> Result<Array2<usize>, CrdaError> {
    let means = class_means(train);
    let xc = center_by_class(train, &means)?;
    let factors = thin_svd_via_gram(&xc, DEFAULT_RANK_TOL)?;
    let log_priors = resolve_log_priors(&means, priors)?;
    let width = deltas.first().map_or(0, Vec::len);
    let mut errors = Array2::zeros((alphas.len(), width));
    let mut shrunk = Array2::<f64>::zeros((train.p(), means.n_groups()));
    for (i, &alpha) in alphas.iter().enumerate() {
        let rc = RegularizedCovariance::build(&factors, alpha)?;
        let t = coefficient_matrix(&rc, &means)?;
        for (j, &delta) in deltas[i].iter().enumerate() {
            ndarray::Zip::from(&mut shrunk).and(&t).for_each(|s, &tv| {
                let cut = tv.abs() - delta;
                *s = if cut > 0.0 { tv.signum() * cut } else { 0.0 };
            });
            let offsets = (&shrunk * means.matrix()).sum_axis(Axis(0)) * -0.5;
            let dots = val_x.dot(&shrunk);
            errors[[i, j]] = count_misses(&dots, &offsets, &log_priors, val_labels);
        }
    }
    Ok(errors)
}

/// Sums per-fold error surfaces; folds run in parallel, the reduction is in
/// fold order.
fn cv_errors_with<F>(
    ds: &LabeledDataset,
    fold_ids: &[usize],
    n_folds: usize,
    dim: (usize, usize),
    eval: F,
) -> Result<Array2<usize>, CrdaError>
where
    F: Fn(&LabeledDataset, ArrayView2<f64>, &[usize]) -> Result<Array2<usize>, CrdaError> + Sync,
{
    let splits = (0..n_folds)
        .map(|fold| fold_split(ds.labels(), fold_ids, fold, ds.n_groups()))
        .collect::<Result<Vec<_>, _>>()?;
    let per_fold = splits
        .par_iter()
        .map(|(train_rows, val_rows)| {
            if val_rows.is_empty() {
                return Ok(Array2::zeros(dim));
            }
            let sub = ds.subset(train_rows)?;
            let vx = ds.x().select(Axis(0), val_rows);
            let vl: Vec<usize> = val_rows.iter().map(|&r| ds.labels()[r]).collect();
            eval(&sub, vx.view(), &vl)
        })
        .collect::<Result<Vec<_>, CrdaError>>()?;
    let mut total = Array2::zeros(dim);
    for fold_errors in &per_fold {
        total += fold_errors;
    }
    Ok(total)
}

/// Support sizes of the full-training model over the grid. After hard
/// thresholding the support size is `min(K, nonzero rows of T)` for every
/// norm, so one count per alpha covers the whole K axis.
fn full_train_nfs(
    ds: &LabeledDataset,
    alphas: &[f64],
    ks: &[usize],
) -> Result<Array2<usize>, CrdaError> {
    let means = class_means(ds);
    let xc = center_by_class(ds, &means)?;
    let factors = thin_svd_via_gram(&xc, DEFAULT_RANK_TOL)?;
    let rows = alphas
        .par_iter()
        .map(|&alpha| {
            let rc = RegularizedCovariance::build(&factors, alpha)?;
            let t = coefficient_matrix(&rc, &means)?;
            let nnz = t
                .rows()
                .into_iter()
                .filter(|r| r.iter().any(|&v| v != 0.0))
                .count();
            Ok(ks.iter().map(|&k| k.min(nnz)).collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>, CrdaError>>()?;
    let mut nfs = Array2::zeros((alphas.len(), ks.len()));
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            nfs[[i, j]] = v;
        }
    }
    Ok(nfs)
}

/// Per-alpha threshold grids and full-training support sizes for the soft
/// baseline.
fn soft_grid_rows(
    ds: &LabeledDataset,
    alphas: &[f64],
) -> Result<(Vec<Vec<f64>>, Array2<usize>), CrdaError> {
    let means = class_means(ds);
    let xc = center_by_class(ds, &means)?;
    let factors = thin_svd_via_gram(&xc, DEFAULT_RANK_TOL)?;
    let rows = alphas
        .par_iter()
        .map(|&alpha| {
            let rc = RegularizedCovariance::build(&factors, alpha)?;
            let t = coefficient_matrix(&rc, &means)?;
            let tmax = t.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
            let deltas: Vec<f64> = (0..SOFT_DELTA_COUNT)
                .map(|j| tmax * (j as f64 / (SOFT_DELTA_COUNT - 1) as f64))
                .collect();
            let mut row_peaks: Vec<f64> = t
                .rows()
                .into_iter()
                .map(|r| r.iter().fold(0.0f64, |a, &v| a.max(v.abs())))
                .collect();
            row_peaks.sort_by(|a, b| b.total_cmp(a));
            let nfs: Vec<usize> = deltas
                .iter()
                .map(|&d| row_peaks.partition_point(|&peak| peak > d))
                .collect();
            Ok((deltas, nfs))
        })
        .collect::<Result<Vec<_>, CrdaError>>()?;
    let mut deltas = Vec::with_capacity(alphas.len());
    let mut nfs = Array2::zeros((alphas.len(), SOFT_DELTA_COUNT));
    for (i, (d, f)) in rows.into_iter().enumerate() {
        for (j, &v) in f.iter().enumerate() {
            nfs[[i, j]] = v;
        }
        deltas.push(d);
    }
    Ok((deltas, nfs))
}

fn search_core(
    ds: &LabeledDataset,
    alphas: &[f64],
    ks: &[usize],
    folds: usize,
    norm: RowNorm,
    seed: u64,
    priors: Option<&[f64]>,
) -> Result<CvReport, CrdaError> {
    let grid = Grid::new(alphas.to_vec(), ks.to_vec(), ds.p())?;
    let fold_ids = make_folds(ds.labels(), folds, seed)?;
    let dim = (grid.alphas.len(), grid.ks.len());
    let errors = cv_errors_with(ds, &fold_ids, folds, dim, |sub, vx, vl| {
        eval_hard_split(sub, vx, vl, &grid.alphas, &grid.ks, norm, priors)
    })?;
    let nfs = full_train_nfs(ds, &grid.alphas, &grid.ks)?;
    let selection = select_pair(&grid.alphas, &grid.ks, &errors, &nfs, ds.n())?;
    Ok(CvReport {
        alphas: grid.alphas,
        ks: grid.ks,
        errors,
        nfs,
        selection,
        norm,
        folds,
        seed,
        n_scored: ds.n(),
    })
}

/// Q-fold cross-validation over the full `(alpha, K)` grid.
pub fn grid_search(
    ds: &LabeledDataset,
    grid: &Grid,
    folds: usize,
    norm: RowNorm,
    seed: u64,
    priors: Option<&[f64]>,
) -> Result<CvReport, CrdaError> {
    search_core(ds, &grid.alphas, &grid.ks, folds, norm, seed, priors)
}

/// Fixes `alpha` by the Ledoit-Wolf estimate and cross-validates `K` alone.
pub fn light_search(
    ds: &LabeledDataset,
    ks: &[usize],
    folds: usize,
    norm: RowNorm,
    seed: u64,
    priors: Option<&[f64]>,
) -> Result<CvReport, CrdaError> {
    let means = class_means(ds);
    let xc = center_by_class(ds, &means)?;
    let alpha = ledoit_wolf_alpha(&xc)?;
    search_core(ds, &[alpha], ks, folds, norm, seed, priors)
}

fn map_labels(train: &LabeledDataset, other: &LabeledDataset) -> Result<Vec<usize>, CrdaError> {
    crate::dataset::map_label_indices(train.label_names(), other)
}

/// Scores the grid on an explicit validation set instead of folds. Models
/// are fit on the full training set; the admissibility threshold refers to
/// the validation-set size.
pub fn holdout_search(
    train: &LabeledDataset,
    validation: &LabeledDataset,
    grid: &Grid,
    norm: RowNorm,
    priors: Option<&[f64]>,
) -> Result<CvReport, CrdaError> {
    let grid = Grid::new(grid.alphas.clone(), grid.ks.clone(), train.p())?;
    if validation.p() != train.p() {
        return Err(CrdaError::DimensionMismatch {
            context: "validation feature count",
            expected: train.p(),
            found: validation.p(),
        });
    }
    let val_labels = map_labels(train, validation)?;
    let errors = eval_hard_split(
        train,
        validation.x().view(),
        &val_labels,
        &grid.alphas,
        &grid.ks,
        norm,
        priors,
    )?;
    let nfs = full_train_nfs(train, &grid.alphas, &grid.ks)?;
    let selection = select_pair(&grid.alphas, &grid.ks, &errors, &nfs, validation.n())?;
    Ok(CvReport {
        alphas: grid.alphas,
        ks: grid.ks,
        errors,
        nfs,
        selection,
        norm,
        folds: 1,
        seed: 0,
        n_scored: validation.n(),
    })
}

/// Q-fold cross-validation of the soft-threshold baseline over
/// `alphas x SOFT_DELTA_COUNT` thresholds.
pub fn soft_search(
    ds: &LabeledDataset,
    alphas: &[f64],
    folds: usize,
    seed: u64,
    priors: Option<&[f64]>,
) -> Result<SoftReport, CrdaError> {
    validate_alphas(alphas)?;
    let (deltas, nfs) = soft_grid_rows(ds, alphas)?;
    let fold_ids = make_folds(ds.labels(), folds, seed)?;
    let dim = (alphas.len(), SOFT_DELTA_COUNT);
    let errors = cv_errors_with(ds, &fold_ids, folds, dim, |sub, vx, vl| {
        eval_soft_split(sub, vx, vl, alphas, &deltas, priors)
    })?;
    let selection = select_with_keys(&errors, &nfs, ds.n(), |i, j| deltas[i][j], alphas)?;
    Ok(SoftReport {
        alphas: alphas.to_vec(),
        deltas,
        errors,
        nfs,
        selection,
        folds,
        seed,
        n_scored: ds.n(),
    })
}

/// Hold-out variant of the soft-threshold search.
pub fn soft_holdout_search(
    train: &LabeledDataset,
    validation: &LabeledDataset,
    alphas: &[f64],
    priors: Option<&[f64]>,
) -> Result<SoftReport, CrdaError> {
    validate_alphas(alphas)?;
    if validation.p() != train.p() {
        return Err(CrdaError::DimensionMismatch {
            context: "validation feature count",
            expected: train.p(),
            found: validation.p(),
        });
    }
    let val_labels = map_labels(train, validation)?;
    let (deltas, nfs) = soft_grid_rows(train, alphas)?;
    let errors = eval_soft_split(
        train,
        validation.x().view(),
        &val_labels,
        alphas,
        &deltas,
        priors,
    )?;
    let selection = select_with_keys(&errors, &nfs, validation.n(), |i, j| deltas[i][j], alphas)?;
    Ok(SoftReport {
        alphas: alphas.to_vec(),
        deltas,
        errors,
        nfs,
        selection,
        folds: 1,
        seed: 0,
        n_scored: validation.n(),
    })
}
