//! Synthetic data from a known linear non-Gaussian acyclic model.
//!
//! Rows are drawn as x = A x + e, solved in causal order. Randomness comes
//! from ChaCha8: the key is derived with `ChaCha8Rng::seed_from_u64(seed)` and
//! row `i` reads from stream `i`, so every row is reproducible on its own and
//! parallel generation yields exactly the sequential output.

use std::collections::HashSet;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{DataMatrix, TrialRecord};
use crate::linalg;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("adjacency must be {p}×{p}")]
    NotSquare { p: usize },
    #[error("adjacency entry ({row}, {col}) = {value} is on or above the diagonal")]
    NotLowerTriangular { row: usize, col: usize, value: f64 },
    #[error("variable `{0}` has a Gaussian error; the model would not be identifiable")]
    GaussianError(String),
    #[error("variable `{0}` has a non-positive or non-finite error scale")]
    BadScale(String),
    #[error("variable `{0}`: mixture separation must lie in (0, 1)")]
    BadSeparation(String),
    #[error("expected {expected} error specs, got {got}")]
    ErrorCount { expected: usize, got: usize },
    #[error("duplicate variable name `{0}`")]
    DuplicateName(String),
    #[error("sample count must be at least 1")]
    NoSamples,
    #[error(transparent)]
    Data(#[from] crate::dataset::DatasetError),
}

pub type Result<T> = std::result::Result<T, SynthError>;

/// Error distribution with variance `scale²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ErrorDist {
    /// Uniform on [−√3·s, √3·s].
    Uniform { scale: f64 },
    /// Laplace with b = s/√2.
    Laplace { scale: f64 },
    /// ½N(−μ, σ²) + ½N(μ, σ²) with μ = separation·s and σ² = (1 − separation²)·s².
    Mixture { scale: f64, separation: f64 },
    /// Parsed so that validation can reject it by name.
    Gaussian { scale: f64 },
}

impl ErrorDist {
    pub fn scale(&self) -> f64 {
        match *self {
            ErrorDist::Uniform { scale }
            | ErrorDist::Laplace { scale }
            | ErrorDist::Mixture { scale, .. }
            | ErrorDist::Gaussian { scale } => scale,
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            ErrorDist::Uniform { scale } => (2.0 * rng.random::<f64>() - 1.0) * 3f64.sqrt() * scale,
            ErrorDist::Laplace { scale } => {
                let b = scale / std::f64::consts::SQRT_2;
                let u: f64 = rng.random::<f64>() - 0.5;
                -b * u.signum() * (1.0 - 2.0 * u.abs()).max(f64::MIN_POSITIVE).ln()
            }
            ErrorDist::Mixture { scale, separation } => {
                let mu = separation * scale;
                let sd = (1.0 - separation * separation).sqrt() * scale;
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                let z: f64 = rng.sample(StandardNormal);
                sign * mu + sd * z
            }
            ErrorDist::Gaussian { scale } => scale * rng.sample::<f64, _>(StandardNormal),
        }
    }
}

/// Ground-truth LiNGAM. Variables are listed in causal order, so `adjacency`
/// (entry [i][j] = direct effect of j on i) is strictly lower triangular.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthModel {
    pub variable_names: Vec<String>,
    pub adjacency: Vec<Vec<f64>>,
    pub errors: Vec<ErrorDist>,
}

impl GroundTruthModel {
    pub fn validate(&self) -> Result<()> {
        let p = self.variable_names.len();
        let mut seen = HashSet::new();
        for n in &self.variable_names {
            if !seen.insert(n) {
                return Err(SynthError::DuplicateName(n.clone()));
            }
        }
        if self.adjacency.len() != p || self.adjacency.iter().any(|r| r.len() != p) {
            return Err(SynthError::NotSquare { p });
        }
        for (i, row) in self.adjacency.iter().enumerate() {
            for (j, &v) in row.iter().enumerate().skip(i) {
                if v != 0.0 {
                    return Err(SynthError::NotLowerTriangular { row: i, col: j, value: v });
                }
            }
        }
        if self.errors.len() != p {
            return Err(SynthError::ErrorCount { expected: p, got: self.errors.len() });
        }
        for (name, e) in self.variable_names.iter().zip(&self.errors) {
            if !(e.scale() > 0.0 && e.scale().is_finite()) {
                return Err(SynthError::BadScale(name.clone()));
            }
            match e {
                ErrorDist::Gaussian { .. } => return Err(SynthError::GaussianError(name.clone())),
                ErrorDist::Mixture { separation, .. } if !(*separation > 0.0 && *separation < 1.0) => {
                    return Err(SynthError::BadSeparation(name.clone()))
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn p(&self) -> usize {
        self.variable_names.len()
    }

    /// Population covariance (I−A)⁻¹ Ψ (I−A)⁻ᵀ.
    pub fn population_covariance(&self) -> Vec<Vec<f64>> {
        let psi: Vec<f64> = self.errors.iter().map(|e| e.scale().powi(2)).collect();
        let cov = linalg::implied_covariance(&self.adjacency, &psi).expect("I − A is unit lower triangular");
        linalg::from_dmatrix(&cov)
    }

    /// Direct effects in population standard-deviation units: a_ij · sd_j / sd_i.
    pub fn standardized_adjacency(&self) -> Vec<Vec<f64>> {
        let cov = self.population_covariance();
        let sd: Vec<f64> = (0..self.p()).map(|i| cov[i][i].sqrt()).collect();
        self.adjacency
            .iter()
            .enumerate()
            .map(|(i, row)| row.iter().enumerate().map(|(j, a)| a * sd[j] / sd[i]).collect())
            .collect()
    }

    /// Population total effects (I−A)⁻¹ − I.
    fn total_effects(&self) -> Vec<Vec<f64>> {
        let p = self.p();
        let mut t = vec![vec![0.0; p]; p];
        for i in 0..p {
            for j in 0..i {
                t[i][j] = self.adjacency[i][j] + (j + 1..i).map(|k| self.adjacency[i][k] * t[k][j]).sum::<f64>();
            }
        }
        t
    }
}

fn sample_row(model: &GroundTruthModel, seed: u64, row: usize) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(row as u64);
    let p = model.p();
    let mut x = vec![0.0; p];
    let mut e = vec![0.0; p];
    for k in 0..p {
        e[k] = model.errors[k].sample(&mut rng);
        x[k] = e[k] + (0..k).map(|j| model.adjacency[k][j] * x[j]).sum::<f64>();
    }
    (x, e)
}

/// Draws `n` rows; also returns the error matrix that produced them.
pub fn generate_with_errors(model: &GroundTruthModel, n: usize, seed: u64) -> Result<(DataMatrix, DataMatrix)> {
    model.validate()?;
    if n == 0 {
        return Err(SynthError::NoSamples);
    }
    let rows: Vec<(Vec<f64>, Vec<f64>)> = (0..n).into_par_iter().map(|i| sample_row(model, seed, i)).collect();
    let (xs, es): (Vec<Vec<f64>>, Vec<Vec<f64>>) = rows.into_iter().unzip();
    let names = model.variable_names.clone();
    Ok((DataMatrix::from_rows(names.clone(), &xs)?, DataMatrix::from_rows(names, &es)?))
}

pub fn generate(model: &GroundTruthModel, n: usize, seed: u64) -> Result<DataMatrix> {
    Ok(generate_with_errors(model, n, seed)?.0)
}

/// Sample count of the desk-scale stand-in dataset (42 participants × 4 conditions × 3 trials).
pub const FIXTURE_ROWS: usize = 504;

/// Variable labels of the nine-variable fixture, in its causal order.
pub const FIXTURE_ORDER: [&str; 9] = ["Q1", "Q2", "Q4", "Q5", "Q3", "Q6", "CIT", "CT", "ACT"];

/// Nine-variable model with Q1 exogenous and CIT/CT/ACT as sinks; every edge
/// has magnitude ≥ 0.3 and every error is uniform with unit variance.
pub fn fixture_model() -> GroundTruthModel {
    let names: Vec<String> = FIXTURE_ORDER.iter().map(|s| s.to_string()).collect();
    let idx = |s: &str| FIXTURE_ORDER.iter().position(|n| *n == s).unwrap();
    let edges: [(&str, &str, f64); 14] = [
        ("Q1", "Q2", 0.8),
        ("Q1", "Q4", 0.5),
        ("Q2", "Q4", 0.4),
        ("Q4", "Q5", 0.6),
        ("Q1", "Q3", -0.3),
        ("Q2", "Q3", -0.4),
        ("Q4", "Q3", -0.5),
        ("Q2", "Q6", -0.3),
        ("Q3", "Q6", 0.6),
        ("Q1", "CIT", -0.4),
        ("Q5", "CIT", -0.3),
        ("Q6", "CIT", 0.4),
        ("Q3", "CT", 0.3),
        ("Q5", "ACT", 0.3),
    ];
    let mut adjacency = vec![vec![0.0; 9]; 9];
    for (from, to, w) in edges {
        adjacency[idx(to)][idx(from)] = w;
    }
    GroundTruthModel {
        variable_names: names,
        adjacency,
        errors: vec![ErrorDist::Uniform { scale: 1.0 }; 9],
    }
}

/// The fixture model and 504 rows drawn from it.
pub fn paper_shaped_fixture(seed: u64) -> (GroundTruthModel, DataMatrix) {
    let model = fixture_model();
    let data = generate(&model, FIXTURE_ROWS, seed).expect("fixture model is valid");
    (model, data)
}

pub const FIXTURE_CONDITIONS: [&str; 4] = ["non", "early", "sync", "late"];

/// Shift added to the Q1 error under each fixture condition, in error-sd units.
const CONDITION_SHIFT: [f64; 4] = [-0.6, 0.6, 0.5, 0.0];

/// Fixture rows rendered as trial records: 42 participants, four conditions,
/// three trials each. A per-condition shift on Q1 propagates through the
/// model; Likert items are rounded onto 1..=5 and durations mapped onto
/// plausible second ranges.
pub fn fixture_trials(seed: u64) -> Vec<TrialRecord> {
    let model = fixture_model();
    let data = generate(&model, FIXTURE_ROWS, seed).expect("fixture model is valid");
    let cov = model.population_covariance();
    let total = model.total_effects();
    let sd: Vec<f64> = (0..9).map(|i| cov[i][i].sqrt()).collect();
    let pos = |s: &str| FIXTURE_ORDER.iter().position(|n| *n == s).unwrap();
    let q1 = pos("Q1");

    let mut out = Vec::with_capacity(FIXTURE_ROWS);
    for r in 0..FIXTURE_ROWS {
        let participant = r / 12;
        let cond = (r / 3) % 4;
        let trial = r % 3 + 1;
        let shift = CONDITION_SHIFT[cond];
        let z = |name: &str| {
            let i = pos(name);
            let propagated = if i == q1 { 1.0 } else { total[i][q1] };
            (data.column(i)[r] + shift * propagated) / sd[i]
        };
        let likert = |name: &str| (3.0 + 1.1 * z(name)).round().clamp(1.0, 5.0) as u8;
        out.push(TrialRecord {
            participant_id: format!("P{:02}", participant + 1),
            condition: FIXTURE_CONDITIONS[cond].to_string(),
            trial_index: trial as u32,
            likert: [likert("Q1"), likert("Q2"), likert("Q3"), likert("Q4"), likert("Q5"), likert("Q6")],
            cit: (3.0 + 0.8 * z("CIT")).max(0.5),
            ct: (1.2 + 0.18 * z("CT")).max(0.3),
            act: (0.95 + 0.13 * z("ACT")).max(0.3),
        });
    }
    out
}
