//! Regularized covariance estimation in factored form.
//!
//! The pooled sample covariance `S = Xc Xcᵀ / n` of wide data (`p >> n`) is
//! never materialized. Its thin SVD is recovered from the `n x n` Gram matrix
//! `XcᵀXc`, and the shrinkage estimate
//!
//! ```text
//! Sigma = alpha * S + (1 - alpha) * eta * I,      eta = tr(S) / p
//! ```
//!
//! is inverted through those factors: `Sigma^-1 M` costs `O(p n k)` for a
//! `p x k` right-hand side instead of the `O(p^3)` of a dense inverse.

use ndarray::{Array1, Array2};

use crate::dataset::CenteredData;
use crate::error::CrdaError;
use crate::linalg;

/// Default relative tolerance deciding which Gram eigenvalues count as rank.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Largest admissible shrinkage weight; `alpha = 1` would make the estimate
/// singular whenever `p > n`.
pub const ALPHA_MAX: f64 = 1.0 - 1e-6;

/// Eigenvalues below this multiple of the largest one are indistinguishable
/// from zero at f64 precision, whatever `rank_tol` asks for. Class centering
/// always produces exact null directions, so the floor is load-bearing.
fn noise_floor(n: usize) -> f64 {
    32.0 * n as f64 * f64::EPSILON
}

/// Thin SVD `Xc = U D Vᵀ` of a centered `p x n` matrix, with only the `m`
/// numerically nonzero singular triplets retained.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    u: Array2<f64>,
    singular: Array1<f64>,
    v: Array2<f64>,
    n_samples: usize,
    gram_trace: f64,
}

impl SvdFactors {
    /// Left singular vectors, `p x m`, orthonormal columns.
    pub fn u(&self) -> &Array2<f64> {
        &self.u
    }

    /// Singular values, strictly positive, descending.
    pub fn singular_values(&self) -> &Array1<f64> {
        &self.singular
    }

    /// Right singular vectors, `n x m`, orthonormal columns.
    pub fn v(&self) -> &Array2<f64> {
        &self.v
    }

    /// Numerical rank `m`.
    pub fn rank(&self) -> usize {
        self.singular.len()
    }

    pub fn p(&self) -> usize {
        self.u.nrows()
    }

    /// Sample count `n` of the centered matrix the factors came from.
    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    /// Shrinkage target scale `eta = tr(S) / p`, taken from the full Gram
    /// trace so truncation cannot bias it.
    pub fn eta(&self) -> f64 {
        self.gram_trace / (self.n_samples as f64 * self.p() as f64)
    }
}

/// Computes the thin SVD of `xc` through the eigendecomposition of its
/// `n x n` Gram matrix, in `O(p n^2 + n^3)` time.
///
/// Eigenvalues at or below `max(rank_tol^2, noise floor)` relative to the
/// largest are treated as zero. Fails with [`CrdaError::ZeroRank`] when
/// nothing remains.
pub fn thin_svd_via_gram(xc: &CenteredData, rank_tol: f64) -> Result<SvdFactors, CrdaError> {
    if !rank_tol.is_finite() || !(0.0..1.0).contains(&rank_tol) {
        return Err(CrdaError::InvalidRankTol { tol: rank_tol });
    }
    let x = xc.matrix();
    let n = xc.n();
    let gram = x.t().dot(x);
    let gram_trace = gram.diag().sum();
    if !gram_trace.is_finite() {
        return Err(CrdaError::NonFinite {
            context: "gram matrix",
        });
    }
    if gram_trace <= 0.0 {
        return Err(CrdaError::ZeroRank);
    }

    let (eigvals, eigvecs) = linalg::symmetric_eigen(&gram);
    let lam_max = eigvals.iter().copied().fold(0.0f64, f64::max);
    if lam_max <= 0.0 {
        return Err(CrdaError::ZeroRank);
    }
    let cutoff = lam_max * rank_tol.powi(2).max(noise_floor(n));
    let mut order: Vec<usize> = (0..n).filter(|&i| eigvals[i] > cutoff).collect();
    if order.is_empty() {
        return Err(CrdaError::ZeroRank);
    }
    order.sort_by(|&a, &b| {
        eigvals[b]
            .partial_cmp(&eigvals[a])
            .unwrap()
            .then(a.cmp(&b))
    });

    let m = order.len();
    let mut v = Array2::<f64>::zeros((n, m));
    let mut singular = Array1::<f64>::zeros(m);
    for (j, &idx) in order.iter().enumerate() {
        singular[j] = eigvals[idx].sqrt();
        let col = eigvecs.column(idx);
        // Fix the sign so the entry of largest magnitude is positive; makes
        // the factors reproducible across eigensolver conventions.
        let mut pivot = 0;
        for i in 1..n {
            if col[i].abs() > col[pivot].abs() {
                pivot = i;
            }
        }
        let sign = if col[pivot] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            v[[i, j]] = sign * col[i];
        }
    }

    let mut u = x.dot(&v);
    for (j, mut col) in u.columns_mut().into_iter().enumerate() {
        col /= singular[j];
    }

    Ok(SvdFactors {
        u,
        singular,
        v,
        n_samples: n,
        gram_trace,
    })
}

/// The shrinkage covariance estimate held in factored form, ready to apply
/// its inverse to tall matrices.
#[derive(Debug, Clone)]
pub struct RegularizedCovariance<'a> {
    factors: &'a SvdFactors,
    alpha: f64,
    eta: f64,
    inner: Array1<f64>,
    outer: f64,
}

impl<'a> RegularizedCovariance<'a> {
    /// Prepares the inverse of `alpha * S + (1 - alpha) * eta * I` from the
    /// thin factors of the centered data. Requires `0 <= alpha < 1`.
    pub fn build(factors: &'a SvdFactors, alpha: f64) -> Result<Self, CrdaError> {
        if !alpha.is_finite() || !(0.0..1.0).contains(&alpha) {
            return Err(CrdaError::InvalidAlpha { alpha });
        }
        let eta = factors.eta();
        let n = factors.n_samples() as f64;
        let outer = 1.0 / ((1.0 - alpha) * eta);
        let inner = factors
            .singular_values()
            .mapv(|d| 1.0 / (alpha * d * d / n + (1.0 - alpha) * eta) - outer);
        Ok(Self {
            factors,
            alpha,
            eta,
            inner,
            outer,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Shrinkage target scale `tr(S) / p`.
    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn factors(&self) -> &SvdFactors {
        self.factors
    }

    /// Applies the inverse estimate to a `p x k` matrix in `O(p m k)` time:
    /// `Sigma^-1 M = U diag(inner) (Uᵀ M) + outer * M`.
    pub fn inverse_apply(&self, m: &Array2<f64>) -> Result<Array2<f64>, CrdaError> {
        let p = self.factors.p();
        if m.nrows() != p {
            return Err(CrdaError::DimensionMismatch {
                context: "inverse_apply row count",
                expected: p,
                found: m.nrows(),
            });
        }
        if self.alpha == 0.0 {
            // The estimate is exactly eta * I.
            return Ok(m / self.eta);
        }
        let u = &self.factors.u;
        let mut t = u.t().dot(m);
        for (i, mut row) in t.rows_mut().into_iter().enumerate() {
            row *= self.inner[i];
        }
        Ok(u.dot(&t) + &(m * self.outer))
    }
}

/// Closed-form shrinkage weight in the style of Ledoit and Wolf, computed
/// from the Gram matrix in `O(p n^2)` time.
///
/// With `d2 = ||S - eta I||_F^2` and
/// `b2 = min(d2, (1/n^2) sum_i ||x_i x_iᵀ - S||_F^2)`, the weight is
/// `1 - b2 / d2`, clipped into `[0, ALPHA_MAX]`.
pub fn ledoit_wolf_alpha(xc: &CenteredData) -> Result<f64, CrdaError> {
    let x = xc.matrix();
    let n = xc.n() as f64;
    let p = xc.p() as f64;
    let gram = x.t().dot(x);
    let trace = gram.diag().sum();
    if !trace.is_finite() {
        return Err(CrdaError::NonFinite {
            context: "gram matrix",
        });
    }
    if trace <= 0.0 {
        return Err(CrdaError::ZeroRank);
    }
    let eta = trace / (n * p);
    let gram_fro2: f64 = gram.iter().map(|v| v * v).sum();
    let s_fro2 = gram_fro2 / (n * n);
    let d2 = s_fro2 - p * eta * eta;
    // All-Frobenius-norm identities over the Gram matrix:
    //   sum_i ||x_i x_iᵀ - S||_F^2 = sum_i G_ii^2 - ||G||_F^2 / n
    let diag2: f64 = gram.diag().iter().map(|v| v * v).sum();
    let bbar2 = (diag2 - gram_fro2 / n) / (n * n);
    if d2 <= f64::EPSILON * s_fro2 {
        // S coincides with its shrinkage target; any weight is equivalent.
        return Ok(0.0);
    }
    let b2 = bbar2.clamp(0.0, d2);
    Ok((1.0 - b2 / d2).clamp(0.0, ALPHA_MAX))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::array;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand::seq::SliceRandom;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn centered(xc: Array2<f64>) -> CenteredData {
        CenteredData::from_matrix(xc)
    }

    fn random_centered(p: usize, n: usize, seed: u64) -> CenteredData {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        centered(Array2::from_shape_fn((p, n), |_| rng.sample(StandardNormal)))
    }

    fn reconstruct(f: &SvdFactors) -> Array2<f64> {
        let mut dv = f.v().to_owned();
        for (j, mut col) in dv.columns_mut().into_iter().enumerate() {
            col *= f.singular_values()[j];
        }
        f.u().dot(&dv.t())
    }

    fn frobenius(a: &Array2<f64>) -> f64 {
        a.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    use crate::testsupport::{dense_inverse, dense_sigma};

    #[test]
    fn rank_one_matrix_yields_single_triplet() {
        // Column (3,4) and a zero column: single singular value 5.
        let f = thin_svd_via_gram(&centered(array![[3.0, 0.0], [4.0, 0.0]]), DEFAULT_RANK_TOL)
            .unwrap();
        assert_eq!(f.rank(), 1);
        assert_relative_eq!(f.singular_values()[0], 5.0, max_relative = 1e-12);
        let back = reconstruct(&f);
        assert_relative_eq!(back[[0, 0]], 3.0, epsilon = 1e-12);
        assert_relative_eq!(back[[1, 0]], 4.0, epsilon = 1e-12);
        assert_relative_eq!(back[[0, 1]], 0.0, epsilon = 1e-12);
        assert_relative_eq!(back[[1, 1]], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn proportional_columns_collapse_to_rank_one() {
        let xc = centered(array![[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]]);
        let f = thin_svd_via_gram(&xc, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(f.rank(), 1);
        assert_relative_eq!(f.singular_values()[0], 70.0f64.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn factors_reconstruct_and_are_orthonormal() {
        let xc = random_centered(50, 20, 3);
        let f = thin_svd_via_gram(&xc, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(f.rank(), 20);

        let err = frobenius(&(&reconstruct(&f) - xc.matrix()));
        assert!(err <= 1e-8 * frobenius(xc.matrix()));

        let utu = f.u().t().dot(f.u());
        let vtv = f.v().t().dot(f.v());
        for i in 0..f.rank() {
            for j in 0..f.rank() {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert_relative_eq!(utu[[i, j]], expected, epsilon = 1e-8);
                assert_relative_eq!(vtv[[i, j]], expected, epsilon = 1e-8);
            }
        }

        let d = f.singular_values();
        for i in 1..d.len() {
            assert!(d[i] > 0.0 && d[i] <= d[i - 1]);
        }
    }

    #[test]
    fn singular_values_match_direct_svd() {
        let xc = random_centered(30, 12, 9);
        let f = thin_svd_via_gram(&xc, DEFAULT_RANK_TOL).unwrap();
        let dense = nalgebra::DMatrix::from_fn(30, 12, |i, j| xc.matrix()[[i, j]]);
        let mut direct = dense.svd(false, false).singular_values.as_slice().to_vec();
        direct.sort_by(|a, b| b.partial_cmp(a).unwrap());
        for (i, d) in f.singular_values().iter().enumerate() {
            assert_relative_eq!(*d, direct[i], max_relative = 1e-10);
        }
    }

    #[test]
    fn zero_matrix_is_rank_zero() {
        let xc = centered(Array2::zeros((4, 3)));
        assert!(matches!(
            thin_svd_via_gram(&xc, DEFAULT_RANK_TOL),
            Err(CrdaError::ZeroRank)
        ));
    }

    #[test]
    fn rank_tolerance_is_validated() {
        let xc = random_centered(4, 3, 1);
        for bad in [-0.1, 1.0, f64::NAN] {
            assert!(matches!(
                thin_svd_via_gram(&xc, bad),
                Err(CrdaError::InvalidRankTol { .. })
            ));
        }
    }

    #[test]
    fn eta_matches_hand_value_and_dense_trace() {
        // Xc = diag(2, 4), n = 2: S = diag(2, 8), tr(S)/p = 5.
        let f = thin_svd_via_gram(&centered(array![[2.0, 0.0], [0.0, 4.0]]), DEFAULT_RANK_TOL)
            .unwrap();
        assert_eq!(f.eta(), 5.0);

        let xc = random_centered(17, 9, 21);
        let f = thin_svd_via_gram(&xc, DEFAULT_RANK_TOL).unwrap();
        let s = xc.matrix().dot(&xc.matrix().t()) / 9.0;
        let dense_eta = s.diag().sum() / 17.0;
        assert_relative_eq!(f.eta(), dense_eta, max_relative = 1e-12);
    }

    #[test]
    fn eta_scales_quadratically() {
        let xc = random_centered(12, 6, 5);
        let scaled = centered(xc.matrix() * 3.0);
        let f1 = thin_svd_via_gram(&xc, DEFAULT_RANK_TOL).unwrap();
        let f2 = thin_svd_via_gram(&scaled, DEFAULT_RANK_TOL).unwrap();
        assert_relative_eq!(f2.eta(), 9.0 * f1.eta(), max_relative = 1e-12);
    }

    #[test]
    fn alpha_outside_unit_interval_is_rejected() {
        let xc = random_centered(6, 4, 2);
        let f = thin_svd_via_gram(&xc, DEFAULT_RANK_TOL).unwrap();
        for bad in [1.0, 1.5, -0.1, f64::NAN] {
            assert!(matches!(
                RegularizedCovariance::build(&f, bad),
                Err(CrdaError::InvalidAlpha { .. })
            ));
        }
        assert!(RegularizedCovariance::build(&f, 0.999_999).is_ok());
    }

    #[test]
    fn alpha_zero_divides_by_eta_exactly() {
        let xc = random_centered(10, 5, 8);
        let f = thin_svd_via_gram(&xc, DEFAULT_RANK_TOL).unwrap();
        let rc = RegularizedCovariance::build(&f, 0.0).unwrap();
        let m = Array2::from_shape_fn((10, 3), |(i, j)| (i + 2 * j) as f64 - 4.5);
        let out = rc.inverse_apply(&m).unwrap();
        let expected = &m / f.eta();
        assert_eq!(out, expected);
    }

    #[test]
    fn identity_covariance_is_a_fixed_point() {
        // Xc = sqrt(2) * I_2 with n = 2 gives S = I, eta = 1, Sigma = I.
        let r = 2.0f64.sqrt();
        let xc = centered(array![[r, 0.0], [0.0, r]]);
        let f = thin_svd_via_gram(&xc, DEFAULT_RANK_TOL).unwrap();
        let m = array![[1.0, -2.0], [0.5, 4.0]];
        for alpha in [0.0, 0.3, 0.9] {
            let rc = RegularizedCovariance::build(&f, alpha).unwrap();
            let out = rc.inverse_apply(&m).unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    assert_relative_eq!(out[[i, j]], m[[i, j]], max_relative = 1e-12);
                }
            }
        }
    }

    #[test]
    fn inverse_apply_matches_dense_inverse() {
        let xc = random_centered(40, 15, 13);
        let f = thin_svd_via_gram(&xc, DEFAULT_RANK_TOL).unwrap();
        let rc = RegularizedCovariance::build(&f, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let m = Array2::from_shape_fn((40, 4), |_| rng.sample::<f64, _>(StandardNormal));

        let fast = rc.inverse_apply(&m).unwrap();
        let dense = dense_inverse(&dense_sigma(&xc, 0.5)).dot(&m);

        let scale = dense.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        for (a, b) in fast.iter().zip(dense.iter()) {
            assert!((a - b).abs() <= 1e-9 * scale);
        }
    }

    #[test]
    fn forward_operator_inverts_inverse_apply() {
        let xc = random_centered(25, 10, 4);
        let f = thin_svd_via_gram(&xc, DEFAULT_RANK_TOL).unwrap();
        let alpha = 0.7;
        let rc = RegularizedCovariance::build(&f, alpha).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = Array2::from_shape_fn((25, 3), |_| rng.sample::<f64, _>(StandardNormal));
        let y = rc.inverse_apply(&m).unwrap();

        // Sigma y computed straight from the factors, independently of the
        // inverse: alpha/n U D^2 Uᵀ y + (1 - alpha) eta y.
        let mut t = f.u().t().dot(&y);
        let n = f.n_samples() as f64;
        for (i, mut row) in t.rows_mut().into_iter().enumerate() {
            let d = f.singular_values()[i];
            row *= alpha * d * d / n;
        }
        let back = f.u().dot(&t) + &(&y * ((1.0 - alpha) * f.eta()));

        let scale = m.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        for (a, b) in back.iter().zip(m.iter()) {
            assert!((a - b).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn inverse_apply_checks_row_count() {
        let xc = random_centered(6, 4, 2);
        let f = thin_svd_via_gram(&xc, DEFAULT_RANK_TOL).unwrap();
        let rc = RegularizedCovariance::build(&f, 0.4).unwrap();
        let m = Array2::<f64>::zeros((5, 2));
        assert!(matches!(
            rc.inverse_apply(&m),
            Err(CrdaError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn inverse_is_positive_definite() {
        let xc = random_centered(30, 8, 17);
        let f = thin_svd_via_gram(&xc, DEFAULT_RANK_TOL).unwrap();
        for alpha in [0.0, 0.5, 0.99] {
            let rc = RegularizedCovariance::build(&f, alpha).unwrap();
            let inv = rc.inverse_apply(&Array2::eye(30)).unwrap();
            let (vals, _) = linalg::symmetric_eigen(&inv);
            let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
            assert!(min > 0.0, "alpha={alpha}: min eigenvalue {min}");
        }
    }

    #[test]
    fn shrinkage_weight_is_small_for_spherical_data() {
        // True covariance I_p with n << p: the identity target is already
        // near-optimal, so the weight on S should be heavy shrinkage. The
        // oracle weight is the argmin of the Monte Carlo average of
        // ||Sigma(alpha) - I||_F^2 over a grid.
        let p = 100;
        let n = 20;
        let reps = 200;
        let grid: Vec<f64> = (0..20).map(|i| i as f64 * 0.05).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut loss = vec![0.0f64; grid.len()];
        let mut alpha_sum = 0.0;
        for _ in 0..reps {
            let xc = centered(Array2::from_shape_fn((p, n), |_| rng.sample(StandardNormal)));
            alpha_sum += ledoit_wolf_alpha(&xc).unwrap();
            let x = xc.matrix();
            let s = x.dot(&x.t()) / n as f64;
            let eta = s.diag().sum() / p as f64;
            for (gi, &alpha) in grid.iter().enumerate() {
                let mut acc = 0.0;
                for i in 0..p {
                    for j in 0..p {
                        let target = if i == j { (1.0 - alpha) * eta } else { 0.0 };
                        let shifted = alpha * s[[i, j]] + target - if i == j { 1.0 } else { 0.0 };
                        acc += shifted * shifted;
                    }
                }
                loss[gi] += acc;
            }
        }
        let mean_alpha = alpha_sum / reps as f64;
        let oracle = grid[loss
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0];
        assert!(mean_alpha < 0.5, "mean alpha {mean_alpha}");
        assert!(
            (mean_alpha - oracle).abs() <= 0.15,
            "mean alpha {mean_alpha} vs oracle {oracle}"
        );
    }

    #[test]
    fn shrinkage_weight_trusts_the_scm_when_n_dominates() {
        // Strongly spiked covariance with n >> p: S is accurate, so the
        // weight should stay close to 1.
        let p = 5;
        let n = 500;
        let reps = 50;
        let scales = [50.0f64.sqrt(), 1.0, 1.0, 1.0, 1.0];
        let grid: Vec<f64> = (0..20).map(|i| i as f64 * 0.05).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let mut loss = vec![0.0f64; grid.len()];
        let mut alpha_sum = 0.0;
        for _ in 0..reps {
            let xc = centered(Array2::from_shape_fn((p, n), |(i, _)| {
                scales[i] * rng.sample::<f64, _>(StandardNormal)
            }));
            alpha_sum += ledoit_wolf_alpha(&xc).unwrap();
            let x = xc.matrix();
            let s = x.dot(&x.t()) / n as f64;
            let eta = s.diag().sum() / p as f64;
            for (gi, &alpha) in grid.iter().enumerate() {
                let mut acc = 0.0;
                for i in 0..p {
                    for j in 0..p {
                        let truth = if i == j { scales[i] * scales[i] } else { 0.0 };
                        let est =
                            alpha * s[[i, j]] + if i == j { (1.0 - alpha) * eta } else { 0.0 };
                        acc += (est - truth) * (est - truth);
                    }
                }
                loss[gi] += acc;
            }
        }
        let mean_alpha = alpha_sum / reps as f64;
        let oracle = grid[loss
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0];
        assert!(mean_alpha > 0.9, "mean alpha {mean_alpha}");
        assert!(
            (mean_alpha - oracle).abs() <= 0.15,
            "mean alpha {mean_alpha} vs oracle {oracle}"
        );
    }

    #[test]
    fn shrinkage_weight_handles_degenerate_input() {
        // S proportional to I: weight is defined as 0.
        let xc = centered(array![[2.0, 0.0], [0.0, 2.0]]);
        assert_eq!(ledoit_wolf_alpha(&xc).unwrap(), 0.0);
        let zero = centered(Array2::zeros((3, 2)));
        assert!(matches!(
            ledoit_wolf_alpha(&zero),
            Err(CrdaError::ZeroRank)
        ));
    }

    #[test]
    fn symmetry_of_the_applied_inverse() {
        let xc = random_centered(20, 7, 19);
        let f = thin_svd_via_gram(&xc, DEFAULT_RANK_TOL).unwrap();
        let rc = RegularizedCovariance::build(&f, 0.6).unwrap();
        let inv = rc.inverse_apply(&Array2::eye(20)).unwrap();
        let scale = inv.diag().iter().fold(0.0f64, |a, v| a.max(v.abs()));
        for i in 0..20 {
            for j in 0..i {
                assert!((inv[[i, j]] - inv[[j, i]]).abs() <= 1e-12 * scale);
            }
        }
    }

    proptest! {
        #[test]
        fn shrinkage_weight_stays_in_range(seed in 0u64..500, p in 2usize..30, n in 2usize..15) {
            let xc = random_centered(p, n, seed);
            let alpha = ledoit_wolf_alpha(&xc).unwrap();
            prop_assert!(alpha.is_finite());
            prop_assert!((0.0..=ALPHA_MAX).contains(&alpha));
        }

        #[test]
        fn dense_equivalence_over_random_instances(seed in 0u64..200) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = rng.gen_range(2..30);
            let n = rng.gen_range(2..15);
            let alpha = *[0.0, 0.3, 0.7, 0.99].choose(&mut rng).unwrap();
            let xc = centered(Array2::from_shape_fn((p, n), |_| rng.sample(StandardNormal)));
            let f = thin_svd_via_gram(&xc, DEFAULT_RANK_TOL).unwrap();
            let rc = RegularizedCovariance::build(&f, alpha).unwrap();
            let m = Array2::from_shape_fn((p, 2), |_| rng.sample::<f64, _>(StandardNormal));
            let fast = rc.inverse_apply(&m).unwrap();
            let dense = dense_inverse(&dense_sigma(&xc, alpha)).dot(&m);
            let scale = dense.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-300);
            for (a, b) in fast.iter().zip(dense.iter()) {
                prop_assert!((a - b).abs() <= 1e-7 * scale);
            }
        }
    }
}
