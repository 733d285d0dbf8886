use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::rank::{average_ranks, tie_groups};
use super::{Result, StatsError};

/// Largest effective sample size that uses the exact null distribution.
pub const EXACT_MAX_N: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WilcoxonMethod {
    Exact,
    Normal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    /// min(W⁺, W⁻)
    pub w: f64,
    pub w_plus: f64,
    pub w_minus: f64,
    /// Pairs left after dropping zero differences.
    pub n_effective: usize,
    pub p_value: f64,
    pub method: WilcoxonMethod,
}

/// Two-sided signed-rank test on paired samples (zero differences dropped).
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<WilcoxonResult> {
    if a.len() != b.len() {
        return Err(StatsError::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(StatsError::EmptySample);
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|v| *v != 0.0).collect();
    if d.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    if d.is_empty() {
        return Err(StatsError::AllZeroDifferences);
    }
    let abs: Vec<f64> = d.iter().map(|v| v.abs()).collect();
    let ranks = average_ranks(&abs);
    let w_plus = d.iter().zip(&ranks).filter(|(v, _)| **v > 0.0).fold(0.0, |acc, (_, r)| acc + r);
    let w_minus = d.iter().zip(&ranks).filter(|(v, _)| **v < 0.0).fold(0.0, |acc, (_, r)| acc + r);
    let w = w_plus.min(w_minus);
    let n = d.len();

    let (p_value, method) = if n <= EXACT_MAX_N {
        (exact_p(&ranks, w), WilcoxonMethod::Exact)
    } else {
        (normal_p(&abs, w), WilcoxonMethod::Normal)
    };
    Ok(WilcoxonResult { w, w_plus, w_minus, n_effective: n, p_value, method })
}

/// Enumerates the sign-flip distribution of W⁺ over doubled (integer) ranks.
fn exact_p(ranks: &[f64], w: f64) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let total: usize = doubled.iter().sum();
    let mut counts = vec![0.0f64; total + 1];
    counts[0] = 1.0;
    let mut reach = 0;
    for &r in &doubled {
        for s in (0..=reach).rev() {
            let c = counts[s];
            if c != 0.0 {
                counts[s + r] += c;
            }
        }
        reach += r;
    }
    let limit = (2.0 * w).round() as usize;
    let tail: f64 = counts[..=limit].iter().sum();
    let all = 2f64.powi(ranks.len() as i32);
    (2.0 * tail / all).min(1.0)
}

/// Normal approximation with tie-corrected variance, no continuity correction.
fn normal_p(abs: &[f64], w: f64) -> f64 {
    let n = abs.len() as f64;
    let mean = n * (n + 1.0) / 4.0;
    let tie_adj: f64 = tie_groups(abs)
        .into_iter()
        .map(|t| {
            let t = t as f64;
            t * t * t - t
        })
        .sum();
    let var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_adj / 48.0;
    let z = (w - mean) / var.sqrt();
    (2.0 * Normal::standard().cdf(-z.abs())).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_positive_differences() {
        // 2 of the 8 sign patterns are at least as extreme as W = 0
        let r = wilcoxon_signed_rank(&[1.0, 2.0, 3.0], &[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(r.w, 0.0);
        assert_eq!(r.p_value, 0.25);
        assert_eq!(r.method, WilcoxonMethod::Exact);
    }

    #[test]
    fn identical_samples_rejected() {
        assert!(matches!(
            wilcoxon_signed_rank(&[1.0, 2.0], &[1.0, 2.0]),
            Err(StatsError::AllZeroDifferences)
        ));
        assert!(wilcoxon_signed_rank(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn swapping_samples_is_symmetric() {
        let a = [1.2, 3.4, 2.2, 5.0, 0.3, 4.4];
        let b = [0.9, 3.9, 1.0, 2.0, 0.1, 4.0];
        let x = wilcoxon_signed_rank(&a, &b).unwrap();
        let y = wilcoxon_signed_rank(&b, &a).unwrap();
        assert_eq!((x.w, x.p_value), (y.w, y.p_value));
        assert_eq!((x.w_plus, x.w_minus), (y.w_minus, y.w_plus));
    }

    const A22: [f64; 22] = [
        0.0012, 0.2987, -0.2741, -0.8906, -0.4547, -0.9916, 0.0601, 1.3402, -0.4922, -0.6205, 0.4898, 0.3569,
        0.1054, -0.9305, -0.0293, 0.6953, -1.3442, -0.4576, -1.9012, -1.2895, -1.8417, -0.2351,
    ];
    const B22: [f64; 22] = [
        -0.9674, 0.5713, 0.4568, 0.1131, -2.2168, -0.2387, 0.2515, 0.4133, -1.2301, -0.1778, -0.6785, -0.5088,
        1.3609, -0.5075, 0.2675, 1.1844, -0.2836, 0.1883, 0.4105, 0.3638, -0.9251, 0.3761,
    ];

    #[test]
    fn exact_and_normal_match_reference() {
        // scipy.stats.wilcoxon: exact p = 0.24789905548095703, approx (no correction) 0.2360189360536452
        let r = wilcoxon_signed_rank(&A22, &B22).unwrap();
        assert_eq!(r.w, 90.0);
        assert!((r.p_value - 0.247_899_055_480_957_03).abs() < 1e-12);
        let abs: Vec<f64> = A22.iter().zip(B22).map(|(a, b)| (a - b).abs()).collect();
        assert!((normal_p(&abs, 90.0) - 0.236_018_936_053_645_2).abs() < 1e-9);
    }

    #[test]
    fn large_sample_with_ties_uses_normal() {
        let a = [3., 4., 5., 2., 6., 7., 3., 5., 6., 8., 4., 5., 6., 7., 3., 4., 5., 6., 7., 8., 5., 6., 4., 3., 6., 7., 8., 9., 5., 6.];
        let b = [2., 4., 3., 3., 5., 5., 2., 4., 6., 6., 3., 4., 5., 5., 4., 3., 5., 5., 6., 6., 4., 5., 5., 2., 5., 6., 6., 7., 4., 6.];
        let r = wilcoxon_signed_rank(&a, &b).unwrap();
        assert_eq!(r.method, WilcoxonMethod::Normal);
        assert_eq!(r.w, 30.0);
        // scipy.stats.wilcoxon(method="approx", correction=False)
        assert!((r.p_value - 0.000_101_236_161_410_384_36).abs() < 1e-12);
    }
}
