//! Structural-equation fit indices for a fitted causal model.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use thiserror::Error;

use crate::dataset::{standardize, DataMatrix, DatasetError};
use crate::linalg;
use crate::lingam::{CausalModel, LingamError};

#[derive(Debug, Error)]
pub enum FitError {
    #[error(transparent)]
    Data(#[from] DatasetError),
    #[error(transparent)]
    Lingam(#[from] LingamError),
    #[error("sample covariance is not positive definite")]
    NotPositiveDefinite,
    #[error("model-implied covariance is singular")]
    SingularImplied,
    #[error("need more observations than variables (n = {n}, p = {p})")]
    TooFewObservations { n: usize, p: usize },
    #[error("baseline chi-square is zero; NFI is undefined")]
    ZeroBaseline,
    #[error("baseline chi-square per dof equals 1; TLI is undefined")]
    DegenerateBaselineRatio,
    #[error("baseline dof must be positive")]
    BaselineDof,
    #[error("sample size must exceed 1")]
    SampleSize,
    #[error("Σ and S must both be {0}×{0}")]
    Shape(usize),
}

pub type Result<T> = std::result::Result<T, FitError>;

/// Σ = (I−A)⁻¹ Ψ (I−A)⁻ᵀ.
pub fn implied_covariance(model: &CausalModel) -> Result<Vec<Vec<f64>>> {
    model.validate()?;
    let sigma = linalg::implied_covariance(&model.adjacency, &model.residual_variances).ok_or(FitError::SingularImplied)?;
    Ok(linalg::from_dmatrix(&sigma))
}

/// p(p+1)/2 − (edges + p).
pub fn model_dof(p: usize, edges: usize) -> i64 {
    (p * (p + 1) / 2) as i64 - (edges + p) as i64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquare {
    pub chi_square: f64,
    pub dof: i64,
    /// Upper-tail p; absent when dof ≤ 0.
    pub p_value: Option<f64>,
    pub n: usize,
    pub free_parameters: usize,
}

fn ml_discrepancy(sigma: &DMatrix<f64>, s: &DMatrix<f64>) -> Result<f64> {
    let p = s.nrows() as f64;
    let s_chol = s.clone().cholesky().ok_or(FitError::NotPositiveDefinite)?;
    let sigma_chol = sigma.clone().cholesky().ok_or(FitError::SingularImplied)?;
    let log_det = |c: &nalgebra::Cholesky<f64, nalgebra::Dyn>| 2.0 * c.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
    let trace = (sigma_chol.solve(s)).trace();
    Ok(log_det(&sigma_chol) - log_det(&s_chol) + trace - p)
}

/// The data on the scale the model was fitted on, columns in model order.
fn model_scale_data(model: &CausalModel, m: &DataMatrix) -> Result<DataMatrix> {
    let m = m.select_columns(&model.variable_names)?;
    Ok(if model.standardized { standardize(&m)? } else { m })
}

fn sample_covariance(m: &DataMatrix) -> Result<DMatrix<f64>> {
    let (n, p) = (m.nrows(), m.ncols());
    if n <= p {
        return Err(FitError::TooFewObservations { n, p });
    }
    Ok(linalg::covariance_matrix(m.columns()))
}

fn upper_tail(chi: f64, dof: i64) -> Option<f64> {
    (dof > 0).then(|| ChiSquared::new(dof as f64).expect("positive dof").sf(chi.max(0.0)))
}

/// χ² = (N−1)·F_ML with F_ML = ln|Σ| − ln|S| + tr(SΣ⁻¹) − p.
pub fn chi_square(model: &CausalModel, m: &DataMatrix) -> Result<ChiSquare> {
    let data = model_scale_data(model, m)?;
    let s = sample_covariance(&data)?;
    let sigma = linalg::to_dmatrix(&implied_covariance(model)?);
    let f = ml_discrepancy(&sigma, &s)?;
    let n = data.nrows();
    let edges = model.edge_count();
    let dof = model_dof(model.p(), edges);
    let chi = (n as f64 - 1.0) * f;
    Ok(ChiSquare { chi_square: chi, dof, p_value: upper_tail(chi, dof), n, free_parameters: edges + model.p() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    pub chi_square: f64,
    /// p(p−1)/2, the dof of the independence model.
    pub dof: i64,
}

/// Independence model Σ_b = diag(S).
pub fn baseline_chi_square(m: &DataMatrix) -> Result<Baseline> {
    let s = sample_covariance(m)?;
    let sigma = DMatrix::from_diagonal(&s.diagonal());
    let p = m.ncols();
    let chi = (m.nrows() as f64 - 1.0) * ml_discrepancy(&sigma, &s)?;
    Ok(Baseline { chi_square: chi, dof: (p * (p - 1) / 2) as i64 })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitIndices {
    pub chi_square: f64,
    pub dof: i64,
    pub p_chi_square: Option<f64>,
    pub baseline_chi_square: f64,
    pub baseline_dof: i64,
    pub cfi: f64,
    pub gfi: Option<f64>,
    pub agfi: Option<f64>,
    pub nfi: f64,
    pub tli: Option<f64>,
    pub rmsea: f64,
    pub n: usize,
}

/// Σ and S on the same scale, for the GFI/AGFI trace form.
pub struct CovariancePair<'a> {
    pub implied: &'a [Vec<f64>],
    pub sample: &'a [Vec<f64>],
}

/// Incremental and absolute indices from (χ², dof) against (χ²_b, dof_b).
/// CFI and TLI are deliberately not capped at 1.
pub fn fit_indices(
    chi: f64,
    dof: i64,
    chi_b: f64,
    dof_b: i64,
    n: usize,
    covariances: Option<CovariancePair<'_>>,
) -> Result<FitIndices> {
    if n <= 1 {
        return Err(FitError::SampleSize);
    }
    if dof_b <= 0 {
        return Err(FitError::BaselineDof);
    }
    if chi_b == 0.0 {
        return Err(FitError::ZeroBaseline);
    }
    let (d, db) = (dof as f64, dof_b as f64);
    let excess = (chi - d).max(0.0);
    let denom = (chi_b - db).max(chi - d).max(0.0);
    let cfi = if denom == 0.0 { 1.0 } else { 1.0 - excess / denom };
    let nfi = (chi_b - chi) / chi_b;
    let base_ratio = chi_b / db;
    if base_ratio == 1.0 {
        return Err(FitError::DegenerateBaselineRatio);
    }
    let tli = (dof > 0).then(|| (base_ratio - chi / d) / (base_ratio - 1.0));
    let rmsea = if dof > 0 { (excess / (d * (n as f64 - 1.0))).sqrt() } else { 0.0 };

    let (gfi, agfi) = match covariances {
        None => (None, None),
        Some(CovariancePair { implied, sample }) => {
            let p = sample.len();
            if implied.len() != p || implied.iter().chain(sample).any(|r| r.len() != p) {
                return Err(FitError::Shape(p));
            }
            let sigma = linalg::to_dmatrix(implied);
            let s = linalg::to_dmatrix(sample);
            let w = sigma.lu().solve(&s).ok_or(FitError::SingularImplied)?;
            let resid = &w - DMatrix::identity(p, p);
            let gfi = 1.0 - (&resid * &resid).trace() / (&w * &w).trace();
            let agfi = (dof > 0).then(|| 1.0 - (p * (p + 1)) as f64 / (2.0 * d) * (1.0 - gfi));
            (Some(gfi), agfi)
        }
    };

    Ok(FitIndices {
        chi_square: chi,
        dof,
        p_chi_square: upper_tail(chi, dof),
        baseline_chi_square: chi_b,
        baseline_dof: dof_b,
        cfi,
        gfi,
        agfi,
        nfi,
        tli,
        rmsea,
        n,
    })
}

/// Re-estimates the structure's free parameters by maximum likelihood.
/// For a recursive model this is OLS of each variable on its parents, with
/// ψ = RSS/(N−1). The edge set and order are kept.
pub fn refit_structure(model: &CausalModel, m: &DataMatrix) -> Result<CausalModel> {
    model.validate()?;
    let data = model_scale_data(model, m)?;
    let mut out = model.clone();
    for i in 0..model.p() {
        let parents: Vec<usize> = (0..model.p()).filter(|&j| model.adjacency[i][j] != 0.0).collect();
        let y = data.column(i);
        let xs: Vec<&[f64]> = parents.iter().map(|&j| data.column(j)).collect();
        let (coef, _) = linalg::ols_r_squared(y, &xs);
        let mut resid = y.to_vec();
        for (&j, &b) in parents.iter().zip(&coef) {
            out.adjacency[i][j] = b;
            for (r, x) in resid.iter_mut().zip(data.column(j)) {
                *r -= b * x;
            }
        }
        out.residual_variances[i] = linalg::variance(&resid);
    }
    Ok(out)
}

/// Model fit for a fitted model: ML refit of its edges, then χ² against the
/// data and indices against the given baseline.
pub fn score_model(model: &CausalModel, m: &DataMatrix, baseline: Baseline) -> Result<FitIndices> {
    let refit = refit_structure(model, m)?;
    let chi = chi_square(&refit, m)?;
    let sigma = implied_covariance(&refit)?;
    let s = linalg::from_dmatrix(&sample_covariance(&model_scale_data(model, m)?)?);
    fit_indices(
        chi.chi_square,
        chi.dof,
        baseline.chi_square,
        baseline.dof,
        chi.n,
        Some(CovariancePair { implied: &sigma, sample: &s }),
    )
}

/// Upper bounds (RMSEA) or lower bounds (everything else) commonly taken as acceptable fit.
pub const THRESHOLDS: [(&str, &str); 7] = [
    ("p_chi_square", "> .050"),
    ("cfi", "> 0.950"),
    ("gfi", "> 0.950"),
    ("agfi", "> 0.950"),
    ("nfi", "> 0.950"),
    ("tli", "> 0.950"),
    ("rmsea", "< 0.070"),
];
