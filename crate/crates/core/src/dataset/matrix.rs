use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use super::records::{Measure, TrialRecord};
use super::{DatasetError, Result};
use crate::linalg;

/// Column-named numeric matrix, N observations × p variables, stored by column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataMatrix {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
    n_rows: usize,
}

impl DataMatrix {
    pub fn from_columns(names: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self> {
        if names.len() != columns.len() {
            return Err(DatasetError::Shape(format!(
                "{} names for {} columns",
                names.len(),
                columns.len()
            )));
        }
        let mut seen = HashSet::new();
        for n in &names {
            if !seen.insert(n.as_str()) {
                return Err(DatasetError::DuplicateColumn(n.clone()));
            }
        }
        let n_rows = columns.first().map_or(0, Vec::len);
        for (name, col) in names.iter().zip(&columns) {
            if col.len() != n_rows {
                return Err(DatasetError::Shape(format!(
                    "column `{name}` has {} rows, expected {n_rows}",
                    col.len()
                )));
            }
            if let Some(row) = col.iter().position(|v| !v.is_finite()) {
                return Err(DatasetError::NonFinite { column: name.clone(), row });
            }
        }
        Ok(DataMatrix { names, columns, n_rows })
    }

    pub fn from_rows(names: Vec<String>, rows: &[Vec<f64>]) -> Result<Self> {
        let p = names.len();
        if let Some(bad) = rows.iter().position(|r| r.len() != p) {
            return Err(DatasetError::Shape(format!("row {bad} does not have {p} entries")));
        }
        let columns = (0..p).map(|j| rows.iter().map(|r| r[j]).collect()).collect();
        Self::from_columns(names, columns)
    }

    pub fn nrows(&self) -> usize {
        self.n_rows
    }

    pub fn ncols(&self) -> usize {
        self.columns.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn column_by_name(&self, name: &str) -> Option<&[f64]> {
        self.index_of(name).map(|j| self.column(j))
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[i]).collect()
    }

    /// Gathers rows by index (indices may repeat).
    pub fn select_rows(&self, rows: &[usize]) -> DataMatrix {
        DataMatrix {
            names: self.names.clone(),
            columns: self.columns.iter().map(|c| rows.iter().map(|&r| c[r]).collect()).collect(),
            n_rows: rows.len(),
        }
    }

    /// Reorders / subsets columns by name.
    pub fn select_columns<S: AsRef<str>>(&self, names: &[S]) -> Result<DataMatrix> {
        let mut cols = Vec::with_capacity(names.len());
        let mut out_names = Vec::with_capacity(names.len());
        for n in names {
            let j = self
                .index_of(n.as_ref())
                .ok_or_else(|| DatasetError::UnknownColumn(n.as_ref().to_string()))?;
            cols.push(self.columns[j].clone());
            out_names.push(n.as_ref().to_string());
        }
        let mut m = DataMatrix::from_columns(out_names, cols)?;
        m.n_rows = self.n_rows;
        Ok(m)
    }

    /// Sample covariance matrix (divisor N−1) as nested rows.
    pub fn covariance(&self) -> Vec<Vec<f64>> {
        linalg::from_dmatrix(&linalg::covariance_matrix(&self.columns))
    }
}

/// How trial records become observations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Aggregation {
    /// One observation per trial.
    #[default]
    Trials,
    /// One observation per (participant, condition): the mean of its trials.
    ParticipantCondition,
}

fn resolve_columns<S: AsRef<str>>(columns: &[S]) -> Result<Vec<Measure>> {
    let mut seen = HashSet::new();
    columns
        .iter()
        .map(|c| {
            let m: Measure = c.as_ref().parse()?;
            if !seen.insert(m) {
                return Err(DatasetError::DuplicateColumn(c.as_ref().to_string()));
            }
            Ok(m)
        })
        .collect()
}

/// Projects records onto the requested measures, one row per record.
pub fn to_matrix<S: AsRef<str>>(records: &[TrialRecord], columns: &[S]) -> Result<DataMatrix> {
    to_matrix_with(records, columns, Aggregation::Trials)
}

pub fn to_matrix_with<S: AsRef<str>>(
    records: &[TrialRecord],
    columns: &[S],
    aggregation: Aggregation,
) -> Result<DataMatrix> {
    let measures = resolve_columns(columns)?;
    let names: Vec<String> = columns.iter().map(|c| c.as_ref().to_string()).collect();
    let cols: Vec<Vec<f64>> = match aggregation {
        Aggregation::Trials => measures
            .iter()
            .map(|&m| records.iter().map(|r| r.value(m)).collect())
            .collect(),
        Aggregation::ParticipantCondition => {
            let mut groups: BTreeMap<(&str, &str), Vec<&TrialRecord>> = BTreeMap::new();
            for r in records {
                groups
                    .entry((r.participant_id.as_str(), r.condition.as_str()))
                    .or_default()
                    .push(r);
            }
            measures
                .iter()
                .map(|&m| {
                    groups
                        .values()
                        .map(|g| g.iter().map(|r| r.value(m)).sum::<f64>() / g.len() as f64)
                        .collect()
                })
                .collect()
        }
    };
    let mut out = DataMatrix::from_columns(names, cols)?;
    if measures.is_empty() {
        out.n_rows = records.len();
    }
    Ok(out)
}

/// z-scores every column using the sample standard deviation.
pub fn standardize(m: &DataMatrix) -> Result<DataMatrix> {
    if m.nrows() < 2 {
        return Err(DatasetError::TooFewObservations { needed: 2, got: m.nrows() });
    }
    let columns = m
        .columns
        .iter()
        .zip(&m.names)
        .map(|(c, name)| {
            let mu = linalg::mean(c);
            let sd = linalg::variance(c).sqrt();
            if !(sd > 0.0) || sd <= 1e-300 {
                return Err(DatasetError::ZeroVariance(name.clone()));
            }
            Ok(c.iter().map(|v| (v - mu) / sd).collect())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok(DataMatrix {
        names: m.names.clone(),
        columns,
        n_rows: m.n_rows,
    })
}
