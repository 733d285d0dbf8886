use serde::{Deserialize, Serialize};

use super::{LingamError, Result};
use crate::linalg;

/// Constants of the maximum-entropy approximation of differential entropy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EntropyConstants {
    pub k1: f64,
    pub k2: f64,
    pub gamma: f64,
}

impl Default for EntropyConstants {
    fn default() -> Self {
        EntropyConstants { k1: 79.047, k2: 7.4129, gamma: 0.37457 }
    }
}

/// xi − cov(xi, xj)/var(xj) · xj.
pub fn residual(xi: &[f64], xj: &[f64]) -> Result<Vec<f64>> {
    if xi.len() != xj.len() || xi.len() < 2 {
        return Err(LingamError::Shape(format!("residual needs equal lengths ≥ 2, got {} and {}", xi.len(), xj.len())));
    }
    let var = linalg::variance(xj);
    if !(var > 0.0) {
        return Err(LingamError::ZeroVariance);
    }
    let slope = linalg::covariance(xi, xj) / var;
    Ok(xi.iter().zip(xj).map(|(a, b)| a - slope * b).collect())
}

fn log_cosh(u: f64) -> f64 {
    let a = u.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// H(u) ≈ (1 + ln 2π)/2 − k1·(E[log cosh u] − γ)² − k2·(E[u·exp(−u²/2)])², for standardized `u`.
pub fn entropy_approx(u: &[f64], c: &EntropyConstants) -> Result<f64> {
    if u.iter().any(|v| !v.is_finite()) {
        return Err(LingamError::NonFinite);
    }
    let n = u.len() as f64;
    let m1 = u.iter().map(|&v| log_cosh(v)).sum::<f64>() / n;
    let m2 = u.iter().map(|&v| v * (-v * v / 2.0).exp()).sum::<f64>() / n;
    Ok((1.0 + (2.0 * std::f64::consts::PI).ln()) / 2.0 - c.k1 * (m1 - c.gamma).powi(2) - c.k2 * m2 * m2)
}

pub(crate) fn standardized(x: &[f64]) -> Result<Vec<f64>> {
    let m = linalg::mean(x);
    let sd = linalg::variance(x).sqrt();
    if !(sd > 0.0) {
        return Err(LingamError::ZeroVariance);
    }
    Ok(x.iter().map(|v| (v - m) / sd).collect())
}

/// Likelihood-ratio statistic for "`cand` precedes `other`": positive values
/// favour cand → other. Both inputs standardized; `h_cand`/`h_other` are
/// their entropies.
pub(crate) fn pair_statistic(cand: &[f64], other: &[f64], h_cand: f64, h_other: f64, c: &EntropyConstants) -> Result<f64> {
    let r_cand = standardized(&residual(cand, other)?)?;
    let r_other = standardized(&residual(other, cand)?)?;
    Ok(h_other + entropy_approx(&r_cand, c)? - h_cand - entropy_approx(&r_other, c)?)
}

/// Σ over `others` of min(0, D)², where D is the pairwise statistic of `xj`
/// against each; lower means more plausibly exogenous.
pub fn independence_score(xj: &[f64], others: &[&[f64]], c: &EntropyConstants) -> Result<f64> {
    if others.is_empty() {
        return Err(LingamError::TooFewVariables(1));
    }
    let hj = entropy_approx(xj, c)?;
    let mut score = 0.0;
    for xi in others {
        let hi = entropy_approx(xi, c)?;
        let d = pair_statistic(xj, xi, hj, hi, c)?;
        score += d.min(0.0).powi(2);
    }
    Ok(score)
}
