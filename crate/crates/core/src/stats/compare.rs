//! Friedman omnibus + Wilcoxon post-hoc battery across experimental conditions.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use super::{bh_fdr, cles, friedman, shapiro_wilk, wilcoxon_signed_rank, FriedmanResult, Result, StatsError};
use crate::dataset::{Measure, TrialRecord};
use crate::linalg;

/// What one row of the block design represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairingUnit {
    /// Mean of each participant's trials per condition.
    #[default]
    ParticipantMeans,
    /// Individual trials, paired by (participant, trial index).
    Trials,
}

/// Which p-values share one Benjamini–Hochberg family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorrectionFamily {
    /// The k(k−1)/2 pairs of one factor.
    #[default]
    PerFactor,
    /// Every pair of every factor compared together.
    Global,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CompareOptions {
    pub unit: PairingUnit,
    pub family: CorrectionFamily,
}

/// Block × condition matrix for one factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionMatrix {
    pub factor: String,
    pub row_labels: Vec<String>,
    pub conditions: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl ConditionMatrix {
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseResult {
    pub condition_a: String,
    pub condition_b: String,
    pub mean_a: f64,
    pub std_a: f64,
    pub mean_b: f64,
    pub std_b: f64,
    pub w_statistic: f64,
    pub p_raw: f64,
    pub p_adjusted: f64,
    pub cles: f64,
}

/// Advisory per-condition normality check; never gates the battery.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalityCheck {
    pub condition: String,
    pub w: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorComparison {
    pub factor: String,
    pub unit: PairingUnit,
    pub n_blocks: usize,
    pub friedman: FriedmanResult,
    pub pairs: Vec<PairwiseResult>,
    pub normality: Vec<NormalityCheck>,
}

fn checked_conditions<S: AsRef<str>>(conditions: &[S]) -> Result<Vec<String>> {
    let mut seen = HashSet::new();
    conditions
        .iter()
        .map(|c| {
            let c = c.as_ref().to_string();
            if !seen.insert(c.clone()) {
                return Err(StatsError::DuplicateCondition(c));
            }
            Ok(c)
        })
        .collect()
}

/// Per-participant mean of `factor` for each listed condition.
///
/// Rows are ordered by participant id; records in unlisted conditions are ignored.
pub fn participant_condition_means<S: AsRef<str>>(
    records: &[TrialRecord],
    factor: Measure,
    conditions: &[S],
) -> Result<ConditionMatrix> {
    let conditions = checked_conditions(conditions)?;
    let mut cells: BTreeMap<&str, Vec<Vec<f64>>> = BTreeMap::new();
    for r in records {
        let Some(j) = conditions.iter().position(|c| *c == r.condition) else {
            continue;
        };
        cells
            .entry(r.participant_id.as_str())
            .or_insert_with(|| vec![Vec::new(); conditions.len()])[j]
            .push(r.value(factor));
    }
    let mut row_labels = Vec::with_capacity(cells.len());
    let mut rows = Vec::with_capacity(cells.len());
    for (pid, per_cond) in cells {
        let row = per_cond
            .iter()
            .zip(&conditions)
            .map(|(vals, c)| {
                if vals.is_empty() {
                    Err(StatsError::MissingCell { participant: pid.to_string(), condition: c.clone() })
                } else {
                    Ok(linalg::mean(vals))
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        row_labels.push(pid.to_string());
        rows.push(row);
    }
    Ok(ConditionMatrix { factor: factor.label().to_string(), row_labels, conditions, rows })
}

/// Raw trials paired across conditions by (participant, trial index).
pub fn trial_condition_matrix<S: AsRef<str>>(
    records: &[TrialRecord],
    factor: Measure,
    conditions: &[S],
) -> Result<ConditionMatrix> {
    let conditions = checked_conditions(conditions)?;
    let mut cells: BTreeMap<(&str, u32), Vec<Option<f64>>> = BTreeMap::new();
    for r in records {
        let Some(j) = conditions.iter().position(|c| *c == r.condition) else {
            continue;
        };
        cells
            .entry((r.participant_id.as_str(), r.trial_index))
            .or_insert_with(|| vec![None; conditions.len()])[j] = Some(r.value(factor));
    }
    let mut row_labels = Vec::new();
    let mut rows = Vec::new();
    for ((pid, trial), per_cond) in cells {
        let row = per_cond
            .iter()
            .zip(&conditions)
            .map(|(v, c)| {
                v.ok_or_else(|| StatsError::MissingCell {
                    participant: format!("{pid} (trial {trial})"),
                    condition: c.clone(),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        row_labels.push(format!("{pid}#{trial}"));
        rows.push(row);
    }
    Ok(ConditionMatrix { factor: factor.label().to_string(), row_labels, conditions, rows })
}

fn sample_std(x: &[f64]) -> f64 {
    if x.len() < 2 {
        0.0
    } else {
        linalg::variance(x).sqrt()
    }
}

fn compare_unadjusted(m: &ConditionMatrix, unit: PairingUnit) -> Result<FactorComparison> {
    let friedman = friedman(&m.rows)?;
    let k = m.conditions.len();
    let columns: Vec<Vec<f64>> = (0..k).map(|j| m.column(j)).collect();
    let mut pairs = Vec::with_capacity(k * (k - 1) / 2);
    for a in 0..k {
        for b in (a + 1)..k {
            let test = wilcoxon_signed_rank(&columns[a], &columns[b])?;
            pairs.push(PairwiseResult {
                condition_a: m.conditions[a].clone(),
                condition_b: m.conditions[b].clone(),
                mean_a: linalg::mean(&columns[a]),
                std_a: sample_std(&columns[a]),
                mean_b: linalg::mean(&columns[b]),
                std_b: sample_std(&columns[b]),
                w_statistic: test.w,
                p_raw: test.p_value,
                p_adjusted: test.p_value,
                cles: cles(&columns[a], &columns[b])?,
            });
        }
    }
    let normality = columns
        .iter()
        .zip(&m.conditions)
        .filter_map(|(col, c)| {
            shapiro_wilk(col).ok().map(|s| NormalityCheck { condition: c.clone(), w: s.w, p_value: s.p_value })
        })
        .collect();
    Ok(FactorComparison {
        factor: m.factor.clone(),
        unit,
        n_blocks: m.rows.len(),
        friedman,
        pairs,
        normality,
    })
}

fn condition_matrix<S: AsRef<str>>(
    records: &[TrialRecord],
    factor: Measure,
    conditions: &[S],
    unit: PairingUnit,
) -> Result<ConditionMatrix> {
    match unit {
        PairingUnit::ParticipantMeans => participant_condition_means(records, factor, conditions),
        PairingUnit::Trials => trial_condition_matrix(records, factor, conditions),
    }
}

fn adjust(pairs: &mut [&mut PairwiseResult]) {
    let raw: Vec<f64> = pairs.iter().map(|p| p.p_raw).collect();
    for (p, adj) in pairs.iter_mut().zip(bh_fdr(&raw)) {
        p.p_adjusted = adj;
    }
}

/// Friedman test plus every pairwise Wilcoxon test for one factor, BH-adjusted
/// across that factor's pairs.
pub fn compare_conditions<S: AsRef<str>>(
    records: &[TrialRecord],
    factor: Measure,
    condition_order: &[S],
    options: CompareOptions,
) -> Result<FactorComparison> {
    let m = condition_matrix(records, factor, condition_order, options.unit)?;
    let mut out = compare_unadjusted(&m, options.unit)?;
    adjust(&mut out.pairs.iter_mut().collect::<Vec<_>>());
    Ok(out)
}

/// Runs the battery over several factors, honoring the correction family.
pub fn compare_factors<S: AsRef<str>>(
    records: &[TrialRecord],
    factors: &[Measure],
    condition_order: &[S],
    options: CompareOptions,
) -> Result<Vec<FactorComparison>> {
    let mut out = factors
        .iter()
        .map(|&f| {
            let m = condition_matrix(records, f, condition_order, options.unit)?;
            compare_unadjusted(&m, options.unit)
        })
        .collect::<Result<Vec<_>>>()?;
    match options.family {
        CorrectionFamily::PerFactor => {
            for fc in &mut out {
                adjust(&mut fc.pairs.iter_mut().collect::<Vec<_>>());
            }
        }
        CorrectionFamily::Global => {
            adjust(&mut out.iter_mut().flat_map(|fc| fc.pairs.iter_mut()).collect::<Vec<_>>());
        }
    }
    Ok(out)
}
