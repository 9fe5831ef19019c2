//! Conversions between ndarray and the nalgebra factorizations used for the
//! small dense subproblems (Gram eigendecomposition, per-block Cholesky).

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array1, Array2};

fn to_nalgebra(a: &Array2<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

/// Eigendecomposition of a symmetric matrix; returns `(eigenvalues, vectors)`
/// with eigenvectors as columns, in nalgebra's native order.
pub(crate) fn symmetric_eigen(a: &Array2<f64>) -> (Array1<f64>, Array2<f64>) {
    let n = a.nrows();
    debug_assert_eq!(n, a.ncols());
    let decomp = SymmetricEigen::new(to_nalgebra(a));
    let values = Array1::from_iter(decomp.eigenvalues.iter().copied());
    let vectors = Array2::from_shape_fn((n, n), |(i, j)| decomp.eigenvectors[(i, j)]);
    (values, vectors)
}

/// Lower Cholesky factor of a symmetric positive definite matrix, or `None`
/// if the factorization breaks down.
pub(crate) fn cholesky_lower(a: &Array2<f64>) -> Option<Array2<f64>> {
    let n = a.nrows();
    debug_assert_eq!(n, a.ncols());
    let chol = to_nalgebra(a).cholesky()?;
    let l = chol.l();
    Some(Array2::from_shape_fn((n, n), |(i, j)| l[(i, j)]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::array;

    #[test]
    fn eigen_recovers_diagonal_spectrum() {
        let a = array![[3.0, 0.0], [0.0, 7.0]];
        let (values, vectors) = symmetric_eigen(&a);
        let mut sorted: Vec<f64> = values.to_vec();
        sorted.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert_relative_eq!(sorted[0], 3.0, max_relative = 1e-12);
        assert_relative_eq!(sorted[1], 7.0, max_relative = 1e-12);
        // A V = V diag(values)
        let av = a.dot(&vectors);
        for j in 0..2 {
            for i in 0..2 {
                assert_relative_eq!(av[[i, j]], vectors[[i, j]] * values[j], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn cholesky_reproduces_matrix() {
        let a = array![[4.0, 2.0], [2.0, 3.0]];
        let l = cholesky_lower(&a).unwrap();
        let back = l.dot(&l.t());
        for i in 0..2 {
            for j in 0..2 {
                assert_relative_eq!(back[[i, j]], a[[i, j]], epsilon = 1e-12);
            }
        }
        assert_eq!(l[[0, 1]], 0.0);
    }

    #[test]
    fn cholesky_rejects_indefinite_matrix() {
        let a = array![[1.0, 2.0], [2.0, 1.0]];
        assert!(cholesky_lower(&a).is_none());
    }
}
