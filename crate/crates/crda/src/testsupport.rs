//! Dense oracles shared by the unit tests. Independent of the factored code
//! paths they check: plain Gauss-Jordan elimination on materialized matrices.

use ndarray::Array2;

use crate::dataset::CenteredData;

/// Dense inverse via Gauss-Jordan elimination with partial pivoting.
pub(crate) fn dense_inverse(a: &Array2<f64>) -> Array2<f64> {
    let n = a.nrows();
    let mut work = a.to_owned();
    let mut inv = Array2::<f64>::eye(n);
    for col in 0..n {
        let mut pivot = col;
        for r in col + 1..n {
            if work[[r, col]].abs() > work[[pivot, col]].abs() {
                pivot = r;
            }
        }
        if pivot != col {
            for j in 0..n {
                work.swap([col, j], [pivot, j]);
                inv.swap([col, j], [pivot, j]);
            }
        }
        let diag = work[[col, col]];
        assert!(diag.abs() > 0.0, "singular matrix in test oracle");
        for j in 0..n {
            work[[col, j]] /= diag;
            inv[[col, j]] /= diag;
        }
        for r in 0..n {
            if r != col {
                let factor = work[[r, col]];
                if factor != 0.0 {
                    for j in 0..n {
                        work[[r, j]] -= factor * work[[col, j]];
                        inv[[r, j]] -= factor * inv[[col, j]];
                    }
                }
            }
        }
    }
    inv
}

/// The shrinkage estimate materialized densely: `alpha S + (1 - alpha) eta I`
/// with `S = Xc Xcᵀ / n` and `eta = tr(S) / p`.
pub(crate) fn dense_sigma(xc: &CenteredData, alpha: f64) -> Array2<f64> {
    let x = xc.matrix();
    let n = xc.n() as f64;
    let p = xc.p();
    let s = x.dot(&x.t()) / n;
    let eta = s.diag().sum() / p as f64;
    let mut sigma = s * alpha;
    for i in 0..p {
        sigma[[i, i]] += (1.0 - alpha) * eta;
    }
    sigma
}
