use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{DatasetError, Result};

/// One experiment trial: six Likert responses and three walking durations (s).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub participant_id: String,
    pub condition: String,
    pub trial_index: u32,
    pub likert: [u8; 6],
    pub cit: f64,
    pub ct: f64,
    pub act: f64,
}

/// The nine numeric measures carried by a [`TrialRecord`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Measure {
    Q1,
    Q2,
    Q3,
    Q4,
    Q5,
    Q6,
    Cit,
    Ct,
    Act,
}

impl Measure {
    pub const ALL: [Measure; 9] = [
        Measure::Q1,
        Measure::Q2,
        Measure::Q3,
        Measure::Q4,
        Measure::Q5,
        Measure::Q6,
        Measure::Cit,
        Measure::Ct,
        Measure::Act,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Measure::Q1 => "Q1",
            Measure::Q2 => "Q2",
            Measure::Q3 => "Q3",
            Measure::Q4 => "Q4",
            Measure::Q5 => "Q5",
            Measure::Q6 => "Q6",
            Measure::Cit => "CIT",
            Measure::Ct => "CT",
            Measure::Act => "ACT",
        }
    }

    pub fn is_likert(self) -> bool {
        matches!(self, Measure::Q1 | Measure::Q2 | Measure::Q3 | Measure::Q4 | Measure::Q5 | Measure::Q6)
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Measure {
    type Err = DatasetError;

    /// Case-insensitive.
    fn from_str(s: &str) -> Result<Self> {
        Measure::ALL
            .iter()
            .copied()
            .find(|m| m.label().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| DatasetError::UnknownColumn(s.to_string()))
    }
}

impl TrialRecord {
    pub fn value(&self, m: Measure) -> f64 {
        match m {
            Measure::Q1 => f64::from(self.likert[0]),
            Measure::Q2 => f64::from(self.likert[1]),
            Measure::Q3 => f64::from(self.likert[2]),
            Measure::Q4 => f64::from(self.likert[3]),
            Measure::Q5 => f64::from(self.likert[4]),
            Measure::Q6 => f64::from(self.likert[5]),
            Measure::Cit => self.cit,
            Measure::Ct => self.ct,
            Measure::Act => self.act,
        }
    }
}

/// Maps record fields to header names in the input file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Schema {
    pub participant: String,
    pub condition: String,
    pub trial: String,
    pub q1: String,
    pub q2: String,
    pub q3: String,
    pub q4: String,
    pub q5: String,
    pub q6: String,
    pub cit: String,
    pub ct: String,
    pub act: String,
    /// Single-byte field delimiter.
    pub delimiter: char,
}

impl Default for Schema {
    fn default() -> Self {
        Schema {
            participant: "participant".into(),
            condition: "condition".into(),
            trial: "trial".into(),
            q1: "Q1".into(),
            q2: "Q2".into(),
            q3: "Q3".into(),
            q4: "Q4".into(),
            q5: "Q5".into(),
            q6: "Q6".into(),
            cit: "CIT".into(),
            ct: "CT".into(),
            act: "ACT".into(),
            delimiter: ',',
        }
    }
}

impl Schema {
    pub fn header_for(&self, m: Measure) -> &str {
        match m {
            Measure::Q1 => &self.q1,
            Measure::Q2 => &self.q2,
            Measure::Q3 => &self.q3,
            Measure::Q4 => &self.q4,
            Measure::Q5 => &self.q5,
            Measure::Q6 => &self.q6,
            Measure::Cit => &self.cit,
            Measure::Ct => &self.ct,
            Measure::Act => &self.act,
        }
    }

    fn delimiter_byte(&self) -> Result<u8> {
        u8::try_from(self.delimiter)
            .map_err(|_| DatasetError::Shape(format!("delimiter {:?} is not a single byte", self.delimiter)))
    }
}

fn column_index(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| DatasetError::MissingColumn(name.to_string()))
}

/// Reads and validates trial records. Rows are numbered from 1, header excluded.
pub fn load_trials(path: impl AsRef<Path>, schema: &Schema) -> Result<Vec<TrialRecord>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_trials(file, schema)
}

pub(crate) fn read_trials<R: std::io::Read>(reader: R, schema: &Schema) -> Result<Vec<TrialRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(schema.delimiter_byte()?)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let i_part = column_index(&headers, &schema.participant)?;
    let i_cond = column_index(&headers, &schema.condition)?;
    let i_trial = column_index(&headers, &schema.trial)?;
    let measure_idx: Vec<(Measure, usize)> = Measure::ALL
        .iter()
        .map(|&m| Ok((m, column_index(&headers, schema.header_for(m))?)))
        .collect::<Result<_>>()?;

    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let row = k + 1;
        let rec = rec?;
        let cell = |i: usize| rec.get(i).unwrap_or("");
        let header = |i: usize| headers.get(i).unwrap_or("").to_string();

        let trial_raw = cell(i_trial);
        let trial: i64 = trial_raw.parse().map_err(|_| DatasetError::Parse {
            row,
            column: header(i_trial),
            value: trial_raw.to_string(),
        })?;
        if trial < 1 || trial > i64::from(u32::MAX) {
            return Err(DatasetError::TrialIndex { row, value: trial });
        }

        let mut likert = [0u8; 6];
        let mut durations = [0.0f64; 3];
        for &(m, i) in &measure_idx {
            let raw = cell(i);
            let parse_err = || DatasetError::Parse {
                row,
                column: header(i),
                value: raw.to_string(),
            };
            if m.is_likert() {
                // accept "4" and "4.0", reject "4.5"
                let v: f64 = raw.parse().map_err(|_| parse_err())?;
                if v.fract() != 0.0 || !v.is_finite() {
                    return Err(parse_err());
                }
                let v = v as i64;
                if !(1..=5).contains(&v) {
                    return Err(DatasetError::LikertRange { row, column: header(i), value: v });
                }
                likert[m as usize] = v as u8;
            } else {
                let v: f64 = raw.parse().map_err(|_| parse_err())?;
                if !v.is_finite() || v <= 0.0 {
                    return Err(DatasetError::NonPositiveDuration { row, column: header(i), value: v });
                }
                durations[m as usize - 6] = v;
            }
        }

        let record = TrialRecord {
            participant_id: cell(i_part).to_string(),
            condition: cell(i_cond).to_string(),
            trial_index: trial as u32,
            likert,
            cit: durations[0],
            ct: durations[1],
            act: durations[2],
        };
        let key = (record.participant_id.clone(), record.condition.clone(), record.trial_index);
        if !seen.insert(key) {
            return Err(DatasetError::DuplicateTrial {
                row,
                participant: record.participant_id,
                condition: record.condition,
                trial: record.trial_index,
            });
        }
        out.push(record);
    }
    Ok(out)
}

/// Writes records with the headers named by `schema`.
pub fn write_trials<W: std::io::Write>(writer: W, records: &[TrialRecord], schema: &Schema) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .delimiter(schema.delimiter_byte()?)
        .from_writer(writer);
    let mut header = vec![schema.participant.clone(), schema.condition.clone(), schema.trial.clone()];
    header.extend(Measure::ALL.iter().map(|&m| schema.header_for(m).to_string()));
    w.write_record(&header)?;
    for r in records {
        let mut row = vec![r.participant_id.clone(), r.condition.clone(), r.trial_index.to_string()];
        row.extend(r.likert.iter().map(u8::to_string));
        row.extend([r.cit, r.ct, r.act].iter().map(|v| format!("{v:.4}")));
        w.write_record(&row)?;
    }
    w.flush().map_err(|source| DatasetError::Io { path: "<writer>".into(), source })?;
    Ok(())
}
