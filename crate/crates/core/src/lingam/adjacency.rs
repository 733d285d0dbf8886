use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::model::CausalModel;
use super::{LingamError, PriorKnowledge, Result, FORBIDDEN};
use crate::dataset::DataMatrix;
use crate::linalg;

/// Stage-2 regression of each variable on its admissible predecessors.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum Regression {
    /// OLS-weighted lasso with the penalty picked by BIC on a 50-point log grid.
    #[default]
    AdaptiveLasso,
    /// Plain least squares; coefficients with |b| ≤ threshold become 0.
    Ols { threshold: f64 },
}

pub const LAMBDA_GRID: usize = 50;
/// Smallest penalty on the grid relative to the largest.
pub const LAMBDA_RATIO: f64 = 1e-4;
const CD_TOL: f64 = 1e-10;
const CD_MAX_SWEEPS: usize = 10_000;

/// Stage 2. Predecessors that are forbidden ancestors of the target, or
/// that already descend from one, are dropped from the design.
pub fn estimate_adjacency(m: &DataMatrix, order: &[usize], pk: &PriorKnowledge, regression: Regression) -> Result<CausalModel> {
    let (n, p) = (m.nrows(), m.ncols());
    let mut seen = vec![false; p];
    if order.len() != p || order.iter().any(|&v| v >= p || std::mem::replace(&mut seen[v], true)) {
        return Err(LingamError::InvalidOrder);
    }
    if n <= p {
        return Err(LingamError::TooFewObservations { n, p });
    }
    if pk.size() != p {
        return Err(LingamError::PriorSize { expected: p, got: pk.size() });
    }

    let mut adjacency = vec![vec![0.0; p]; p];
    let mut residual_variances = vec![0.0; p];
    // ancestors[v][u]: u reaches v through the edges chosen so far.
    let mut ancestors = vec![vec![false; p]; p];

    for (pos, &target) in order.iter().enumerate() {
        let forbidden = |u: usize| pk.get(target, u) == FORBIDDEN;
        let allowed: Vec<usize> = order[..pos]
            .iter()
            .copied()
            .filter(|&u| !forbidden(u) && !(0..p).any(|a| ancestors[u][a] && forbidden(a)))
            .collect();
        let y = m.column(target);
        let xs: Vec<&[f64]> = allowed.iter().map(|&u| m.column(u)).collect();
        let coef = match regression {
            _ if allowed.is_empty() => Vec::new(),
            Regression::AdaptiveLasso => adaptive_lasso(y, &xs).ok_or_else(|| singular(m, target))?,
            Regression::Ols { threshold } => ols(y, &xs)
                .ok_or_else(|| singular(m, target))?
                .into_iter()
                .map(|b| if b.abs() <= threshold { 0.0 } else { b })
                .collect(),
        };
        let mut fitted_residual = y.to_vec();
        for (&u, &b) in allowed.iter().zip(&coef) {
            if b == 0.0 {
                continue;
            }
            adjacency[target][u] = b;
            ancestors[target][u] = true;
            for a in 0..p {
                if ancestors[u][a] {
                    ancestors[target][a] = true;
                }
            }
            for (r, x) in fitted_residual.iter_mut().zip(m.column(u)) {
                *r -= b * x;
            }
        }
        residual_variances[target] = linalg::variance(&fitted_residual);
    }

    Ok(CausalModel {
        variable_names: m.names().to_vec(),
        causal_order: order.to_vec(),
        adjacency,
        residual_variances,
        standardized: false,
    })
}

fn singular(m: &DataMatrix, target: usize) -> LingamError {
    LingamError::SingularDesign(m.names()[target].clone())
}

struct Standardized {
    y: DVector<f64>,
    x: DMatrix<f64>,
    sy: f64,
    sx: Vec<f64>,
}

/// Centres and scales to unit population variance; `None` on a constant column.
fn standardize_design(y: &[f64], xs: &[&[f64]]) -> Option<Standardized> {
    let n = y.len();
    let scale = |v: &[f64]| {
        let m = linalg::mean(v);
        let sd = (v.iter().map(|a| (a - m).powi(2)).sum::<f64>() / n as f64).sqrt();
        (sd > 0.0).then(|| (v.iter().map(|a| (a - m) / sd).collect::<Vec<_>>(), sd))
    };
    let (ys, sy) = match scale(y) {
        Some(v) => v,
        // A constant target has nothing to explain.
        None => (vec![0.0; n], 1.0),
    };
    let mut x = DMatrix::zeros(n, xs.len());
    let mut sx = Vec::with_capacity(xs.len());
    for (k, col) in xs.iter().enumerate() {
        let (c, s) = scale(col)?;
        x.set_column(k, &DVector::from_vec(c));
        sx.push(s);
    }
    Some(Standardized { y: DVector::from_vec(ys), x, sy, sx })
}

fn solve_normal(x: &DMatrix<f64>, y: &DVector<f64>) -> Option<DVector<f64>> {
    let gram = x.transpose() * x;
    let rhs = x.transpose() * y;
    let chol = gram.clone().cholesky()?;
    let diag_max = gram.diagonal().max();
    let diag_min = chol.l().diagonal().iter().fold(f64::INFINITY, |a, &b| a.min(b * b));
    if diag_min <= 1e-12 * diag_max {
        return None;
    }
    Some(chol.solve(&rhs))
}

/// OLS slopes (with intercept) on the original scale.
pub(crate) fn ols(y: &[f64], xs: &[&[f64]]) -> Option<Vec<f64>> {
    let s = standardize_design(y, xs)?;
    let b = solve_normal(&s.x, &s.y)?;
    Some(b.iter().zip(&s.sx).map(|(b, sx)| b * s.sy / sx).collect())
}

fn soft_threshold(v: f64, l: f64) -> f64 {
    if v > l {
        v - l
    } else if v < -l {
        v + l
    } else {
        0.0
    }
}

/// Coordinate descent on (1/2n)‖y − Zθ‖² + λ‖θ‖₁ in covariance form.
fn lasso_cd(gram: &DMatrix<f64>, zy: &DVector<f64>, lambda: f64, theta: &mut DVector<f64>) {
    let k = theta.len();
    for _ in 0..CD_MAX_SWEEPS {
        let mut max_delta = 0.0f64;
        for j in 0..k {
            let g = gram[(j, j)];
            if g <= 0.0 {
                theta[j] = 0.0;
                continue;
            }
            let partial = zy[j] - (0..k).filter(|&l| l != j).map(|l| gram[(j, l)] * theta[l]).sum::<f64>();
            let new = soft_threshold(partial, lambda) / g;
            max_delta = max_delta.max((new - theta[j]).abs());
            theta[j] = new;
        }
        if max_delta < CD_TOL {
            break;
        }
    }
}

/// Adaptive lasso: OLS weights |b̂|, lasso on the reweighted design over a
/// log grid from λ_max down to λ_max·1e-4 with warm starts, BIC
/// (n·ln(RSS/n) + ln(n)·df) selection with ties going to the larger λ.
pub(crate) fn adaptive_lasso(y: &[f64], xs: &[&[f64]]) -> Option<Vec<f64>> {
    let s = standardize_design(y, xs)?;
    let n = y.len() as f64;
    let w = solve_normal(&s.x, &s.y)?.map(f64::abs);
    let mut z = s.x.clone();
    for (k, wk) in w.iter().enumerate() {
        z.column_mut(k).scale_mut(*wk);
    }
    let gram = z.transpose() * &z / n;
    let zy = z.transpose() * &s.y / n;
    let lambda_max = zy.amax();

    let k = xs.len();
    let mut theta = DVector::zeros(k);
    let mut best = (f64::INFINITY, DVector::zeros(k));
    if lambda_max > 0.0 {
        for t in 0..LAMBDA_GRID {
            let lambda = lambda_max * LAMBDA_RATIO.powf(t as f64 / (LAMBDA_GRID - 1) as f64);
            lasso_cd(&gram, &zy, lambda, &mut theta);
            let rss = (&s.y - &z * &theta).norm_squared().max(f64::MIN_POSITIVE);
            let df = theta.iter().filter(|v| **v != 0.0).count() as f64;
            let bic = n * (rss / n).ln() + n.ln() * df;
            if bic < best.0 {
                best = (bic, theta.clone());
            }
        }
    }
    Some(
        best.1
            .iter()
            .zip(w.iter())
            .zip(&s.sx)
            .map(|((t, w), sx)| t * w * s.sy / sx)
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ols_recovers_exact_plane() {
        let x1 = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let x2 = [2.0, -1.0, 0.5, 3.0, 1.0, 0.0];
        let y: Vec<f64> = x1.iter().zip(&x2).map(|(a, b)| 1.0 + 2.0 * a - 0.5 * b).collect();
        let b = ols(&y, &[&x1, &x2]).unwrap();
        assert!((b[0] - 2.0).abs() < 1e-10 && (b[1] + 0.5).abs() < 1e-10);
    }

    #[test]
    fn collinear_design_is_singular() {
        let x1 = [1.0, 2.0, 3.0, 4.0];
        let x2 = [2.0, 4.0, 6.0, 8.0];
        assert!(ols(&[1.0, 0.0, 1.0, 3.0], &[&x1, &x2]).is_none());
        assert!(adaptive_lasso(&[1.0, 0.0, 1.0, 3.0], &[&x1, &x2]).is_none());
    }

    #[test]
    fn lasso_zeroes_irrelevant_predictor() {
        let n = 400;
        let x1: Vec<f64> = (0..n).map(|i| ((i * 37) % 101) as f64 / 101.0 - 0.5).collect();
        let x2: Vec<f64> = (0..n).map(|i| ((i * 53 + 7) % 97) as f64 / 97.0 - 0.5).collect();
        let noise: Vec<f64> = (0..n).map(|i| ((i * 71 + 3) % 89) as f64 / 89.0 - 0.5).collect();
        let y: Vec<f64> = (0..n).map(|i| 0.9 * x1[i] + 0.1 * noise[i]).collect();
        let b = adaptive_lasso(&y, &[&x1, &x2]).unwrap();
        assert!((b[0] - 0.9).abs() < 0.05, "{b:?}");
        assert_eq!(b[1], 0.0);
    }

    #[test]
    fn soft_threshold_cases() {
        assert_eq!(soft_threshold(3.0, 1.0), 2.0);
        assert_eq!(soft_threshold(-3.0, 1.0), -2.0);
        assert_eq!(soft_threshold(0.5, 1.0), 0.0);
    }
}
