use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, FisherSnedecor};

use super::rank::{average_ranks, tie_groups};
use super::{Result, StatsError};

/// Friedman test in its F form, built on Kendall's coefficient of concordance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FriedmanResult {
    pub n: usize,
    pub k: usize,
    /// Kendall's W (tie-corrected).
    pub w: f64,
    /// `None` when W = 1 and the statistic is infinite.
    pub f: Option<f64>,
    pub ddof1: f64,
    pub ddof2: f64,
    pub p_value: f64,
    /// W = 1: perfect concordance, F undefined, p reported as 0.
    pub degenerate: bool,
}

/// F statistic and degrees of freedom for a given W: F = W(n−1)/(1−W),
/// ddof1 = (k−1) − 2/n, ddof2 = (n−1)·ddof1.
pub fn f_from_w(w: f64, n: usize, k: usize) -> (f64, f64, f64) {
    let nf = n as f64;
    let ddof1 = (k as f64 - 1.0) - 2.0 / nf;
    let ddof2 = (nf - 1.0) * ddof1;
    (w * (nf - 1.0) / (1.0 - w), ddof1, ddof2)
}

/// Rows are blocks (participants), columns are treatments (conditions).
pub fn friedman(rows: &[Vec<f64>]) -> Result<FriedmanResult> {
    let n = rows.len();
    if n < 2 {
        return Err(StatsError::TooSmall { what: "rows", needed: 2, got: n });
    }
    let k = rows[0].len();
    if k < 2 {
        return Err(StatsError::TooSmall { what: "conditions", needed: 2, got: k });
    }
    let mut rank_sums = vec![0.0; k];
    let mut ties = 0.0;
    for (i, row) in rows.iter().enumerate() {
        if row.len() != k {
            return Err(StatsError::Ragged { row: i, expected: k, got: row.len() });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(StatsError::NonFinite);
        }
        for (s, r) in rank_sums.iter_mut().zip(average_ranks(row)) {
            *s += r;
        }
        ties += tie_groups(row)
            .into_iter()
            .map(|t| {
                let t = t as f64;
                t * (t * t - 1.0)
            })
            .sum::<f64>();
    }
    let (nf, kf) = (n as f64, k as f64);
    let ssbn: f64 = rank_sums.iter().map(|r| r * r).sum();
    let denom = nf * nf * kf * (kf * kf - 1.0) - nf * ties;
    if denom <= 0.0 {
        return Err(StatsError::NoVariation);
    }
    let w = ((12.0 * ssbn - 3.0 * nf * nf * kf * (kf + 1.0).powi(2)) / denom).clamp(0.0, 1.0);
    let (f, ddof1, ddof2) = f_from_w(w, n, k);
    if w >= 1.0 {
        return Ok(FriedmanResult { n, k, w, f: None, ddof1, ddof2, p_value: 0.0, degenerate: true });
    }
    let dist = FisherSnedecor::new(ddof1, ddof2).expect("positive degrees of freedom");
    Ok(FriedmanResult {
        n,
        k,
        w,
        f: Some(f),
        ddof1,
        ddof2,
        p_value: dist.sf(f),
        degenerate: false,
    })
}
