use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::{DataMatrix, DatasetError, Result};
use crate::linalg;
use crate::stats::rank::average_ranks;

/// Per-column descriptive statistics in the column's native units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptiveRow {
    pub name: String,
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (divisor N−1); 0 when N = 1.
    pub std: f64,
    pub median: f64,
    pub iqr: f64,
    pub min: f64,
    pub max: f64,
    /// Set when N = 1 and `std` is a placeholder.
    pub single_observation: bool,
}

/// Linear-interpolation quantile (h = (N−1)q) of an ascending slice.
pub(crate) fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn describe(m: &DataMatrix) -> Result<Vec<DescriptiveRow>> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Err(DatasetError::TooFewObservations { needed: 1, got: m.nrows() });
    }
    Ok(m
        .columns()
        .iter()
        .zip(m.names())
        .map(|(c, name)| {
            let mut sorted = c.clone();
            sorted.sort_by(f64::total_cmp);
            let n = c.len();
            DescriptiveRow {
                name: name.clone(),
                n,
                mean: linalg::mean(c),
                std: if n > 1 { linalg::variance(c).sqrt() } else { 0.0 },
                median: quantile_sorted(&sorted, 0.5),
                iqr: quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25),
                min: sorted[0],
                max: sorted[n - 1],
                single_observation: n == 1,
            }
        })
        .collect())
}

/// Spearman rank correlations with two-sided t-approximation p-values.
///
/// Pairs involving a constant column are `None` and listed in `undefined_pairs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpearmanMatrix {
    pub names: Vec<String>,
    pub n: usize,
    pub rho: Vec<Vec<Option<f64>>>,
    pub p_value: Vec<Vec<Option<f64>>>,
    pub undefined_pairs: Vec<(String, String)>,
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let (mx, my) = (linalg::mean(x), linalg::mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

pub(crate) fn correlation_p_value(r: f64, n: usize) -> f64 {
    if r.abs() >= 1.0 {
        return 0.0;
    }
    let df = (n - 2) as f64;
    let t = r * (df / (1.0 - r * r)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).expect("df > 0");
    (2.0 * dist.sf(t.abs())).min(1.0)
}

pub fn spearman_matrix(m: &DataMatrix) -> Result<SpearmanMatrix> {
    let n = m.nrows();
    if n < 3 {
        return Err(DatasetError::TooFewObservations { needed: 3, got: n });
    }
    let p = m.ncols();
    let ranks: Vec<Vec<f64>> = m.columns().iter().map(|c| average_ranks(c)).collect();
    let mut rho = vec![vec![None; p]; p];
    let mut pv = vec![vec![None; p]; p];
    let mut undefined = Vec::new();
    for i in 0..p {
        rho[i][i] = Some(1.0);
        pv[i][i] = Some(0.0);
        for j in (i + 1)..p {
            match pearson(&ranks[i], &ranks[j]) {
                Some(r) => {
                    let pval = correlation_p_value(r, n);
                    rho[i][j] = Some(r);
                    rho[j][i] = Some(r);
                    pv[i][j] = Some(pval);
                    pv[j][i] = Some(pval);
                }
                None => undefined.push((m.names()[i].clone(), m.names()[j].clone())),
            }
        }
    }
    Ok(SpearmanMatrix {
        names: m.names().to_vec(),
        n,
        rho,
        p_value: pv,
        undefined_pairs: undefined,
    })
}

/// Variance inflation factors, one per column.
///
/// Exact collinearity yields `f64::INFINITY` for the affected column.
pub fn vif(m: &DataMatrix) -> Result<Vec<f64>> {
    let (n, p) = (m.nrows(), m.ncols());
    if n <= p {
        return Err(DatasetError::TooFewObservations { needed: p + 1, got: n });
    }
    Ok((0..p)
        .map(|j| {
            let others: Vec<&[f64]> = (0..p).filter(|&k| k != j).map(|k| m.column(k)).collect();
            let (_, r2) = linalg::ols_r_squared(m.column(j), &others);
            let tol = 1.0 - r2;
            if tol <= 1e-10 {
                f64::INFINITY
            } else {
                1.0 / tol
            }
        })
        .collect())
}
