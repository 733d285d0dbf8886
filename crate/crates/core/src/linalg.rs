//! Dense helpers on top of nalgebra for the small (p ≲ 20) matrices used here.

use nalgebra::{DMatrix, DVector};

pub(crate) fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Sample covariance with divisor n−1.
pub(crate) fn covariance(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    let s: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    s / (x.len() as f64 - 1.0)
}

pub(crate) fn variance(x: &[f64]) -> f64 {
    covariance(x, x)
}

/// Sample covariance matrix (divisor n−1) of a set of equal-length columns.
pub(crate) fn covariance_matrix(columns: &[Vec<f64>]) -> DMatrix<f64> {
    let p = columns.len();
    let centered: Vec<Vec<f64>> = columns
        .iter()
        .map(|c| {
            let m = mean(c);
            c.iter().map(|v| v - m).collect()
        })
        .collect();
    let n = columns.first().map_or(0, Vec::len);
    let mut s = DMatrix::zeros(p, p);
    for i in 0..p {
        for j in 0..=i {
            let v: f64 = centered[i].iter().zip(&centered[j]).map(|(a, b)| a * b).sum();
            let v = v / (n as f64 - 1.0);
            s[(i, j)] = v;
            s[(j, i)] = v;
        }
    }
    s
}

pub(crate) fn to_dmatrix(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let p = rows.len();
    let q = rows.first().map_or(0, Vec::len);
    DMatrix::from_fn(p, q, |i, j| rows[i][j])
}

pub(crate) fn from_dmatrix(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// Least squares with intercept via the pseudo-inverse; returns (coefficients, R²).
///
/// Rank-deficient designs get the minimum-norm solution, so R² stays defined.
pub(crate) fn ols_r_squared(y: &[f64], predictors: &[&[f64]]) -> (Vec<f64>, f64) {
    let n = y.len();
    let k = predictors.len();
    let my = mean(y);
    let means: Vec<f64> = predictors.iter().map(|c| mean(c)).collect();
    let x = DMatrix::from_fn(n, k, |r, c| predictors[c][r] - means[c]);
    let yv = DVector::from_iterator(n, y.iter().map(|v| v - my));
    let sst = yv.norm_squared();
    if k == 0 {
        return (Vec::new(), 0.0);
    }
    let svd = x.clone().svd(true, true);
    let beta = svd
        .solve(&yv, 1e-10 * svd.singular_values.max().max(1.0))
        .unwrap_or_else(|_| DVector::zeros(k));
    let resid = &yv - &x * &beta;
    let sse = resid.norm_squared();
    let r2 = if sst > 0.0 { 1.0 - sse / sst } else { 0.0 };
    (beta.iter().copied().collect(), r2)
}

/// (I−A)⁻¹ Ψ (I−A)⁻ᵀ with Ψ = diag(psi); `None` if I−A is singular.
pub(crate) fn implied_covariance(adjacency: &[Vec<f64>], psi: &[f64]) -> Option<DMatrix<f64>> {
    let p = psi.len();
    let a = to_dmatrix(adjacency);
    let inv = (DMatrix::identity(p, p) - a).try_inverse()?;
    let psi = DMatrix::from_diagonal(&DVector::from_column_slice(psi));
    Some(&inv * psi * inv.transpose())
}
