//! Nonparametric condition-comparison battery and the normality test used to
//! audit discovery residuals.

mod compare;
mod friedman;
mod multiple;
pub mod rank;
mod shapiro;
mod wilcoxon;

use thiserror::Error;

pub use compare::{
    compare_conditions, compare_factors, participant_condition_means, trial_condition_matrix, CompareOptions,
    ConditionMatrix, CorrectionFamily, FactorComparison, NormalityCheck, PairingUnit, PairwiseResult,
};
pub use friedman::{f_from_w, friedman, FriedmanResult};
pub use multiple::{bh_fdr, cles};
pub use shapiro::{shapiro_wilk, ShapiroWilk};
pub use wilcoxon::{wilcoxon_signed_rank, WilcoxonMethod, WilcoxonResult};

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("Shapiro-Wilk needs 3..=5000 observations, got {0}")]
    SampleSizeOutOfRange(usize),
    #[error("all observations are identical")]
    ZeroRange,
    #[error("need at least {needed} {what}, got {got}")]
    TooSmall { what: &'static str, needed: usize, got: usize },
    #[error("ragged input: row {row} has {got} entries, expected {expected}")]
    Ragged { row: usize, expected: usize, got: usize },
    #[error("paired samples differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("every paired difference is zero")]
    AllZeroDifferences,
    #[error("no within-row variation: every row is fully tied")]
    NoVariation,
    #[error("empty sample")]
    EmptySample,
    #[error("participant `{participant}` has no trial in condition `{condition}`")]
    MissingCell { participant: String, condition: String },
    #[error("duplicate condition `{0}` in condition order")]
    DuplicateCondition(String),
    #[error("non-finite value in input")]
    NonFinite,
}

pub type Result<T> = std::result::Result<T, StatsError>;

/// Significance stars at .05 / .01 / .001.
pub fn stars(p: f64) -> &'static str {
    if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}
