use serde::{Deserialize, Serialize};

use super::{LingamError, Result};

/// Entry value: no directed path from j to i.
pub const FORBIDDEN: i8 = 0;
/// Entry value: a directed path from j to i exists.
pub const REQUIRED: i8 = 1;
/// Entry value: nothing known.
pub const UNKNOWN: i8 = -1;

/// Path constraints; `entries[i][j]` speaks about paths from j to i.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<i8>>", into = "Vec<Vec<i8>>")]
pub struct PriorKnowledge {
    entries: Vec<Vec<i8>>,
}

/// Whether variables declared as sinks may cause one another.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SinkEdges {
    /// Sinks do not influence anything, other sinks included.
    #[default]
    Forbidden,
    /// Sinks do not influence non-sinks but may influence each other.
    AllowedAmongSinks,
}

impl PriorKnowledge {
    pub fn unknown(p: usize) -> Self {
        let mut entries = vec![vec![UNKNOWN; p]; p];
        for (i, row) in entries.iter_mut().enumerate() {
            row[i] = UNKNOWN;
        }
        PriorKnowledge { entries }
    }

    pub fn from_matrix(entries: Vec<Vec<i8>>) -> Result<Self> {
        let p = entries.len();
        if entries.iter().any(|r| r.len() != p) {
            return Err(LingamError::InvalidPrior(format!("matrix must be {p}×{p}")));
        }
        let mut entries = entries;
        for (i, row) in entries.iter_mut().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if ![FORBIDDEN, REQUIRED, UNKNOWN].contains(v) {
                    return Err(LingamError::InvalidPrior(format!("entry ({i}, {j}) = {v} not in {{-1, 0, 1}}")));
                }
            }
            row[i] = UNKNOWN;
        }
        let pk = PriorKnowledge { entries };
        pk.check_consistent()?;
        Ok(pk)
    }

    /// Q1-style exogenous inputs and CIT-style sink outputs, by label.
    pub fn from_roles<S: AsRef<str>>(names: &[S], exogenous: &[S], sinks: &[S], sink_edges: SinkEdges) -> Result<Self> {
        let find = |label: &str| {
            names
                .iter()
                .position(|n| n.as_ref() == label)
                .ok_or_else(|| LingamError::UnknownVariable(label.to_string()))
        };
        let exo = exogenous.iter().map(|s| find(s.as_ref())).collect::<Result<Vec<_>>>()?;
        let sink = sinks.iter().map(|s| find(s.as_ref())).collect::<Result<Vec<_>>>()?;
        if let Some(both) = exo.iter().find(|e| sink.contains(e)) {
            return Err(LingamError::InvalidPrior(format!(
                "`{}` cannot be both exogenous and a sink",
                names[*both].as_ref()
            )));
        }
        let mut pk = PriorKnowledge::unknown(names.len());
        for &e in &exo {
            for j in 0..names.len() {
                pk.set(e, j, FORBIDDEN);
            }
        }
        for &s in &sink {
            for i in 0..names.len() {
                if sink_edges == SinkEdges::AllowedAmongSinks && sink.contains(&i) {
                    continue;
                }
                pk.set(i, s, FORBIDDEN);
            }
        }
        pk.check_consistent()?;
        Ok(pk)
    }

    pub fn size(&self) -> usize {
        self.entries.len()
    }

    /// Constraint on paths from `j` to `i`.
    pub fn get(&self, i: usize, j: usize) -> i8 {
        if i == j {
            UNKNOWN
        } else {
            self.entries[i][j]
        }
    }

    fn set(&mut self, i: usize, j: usize, v: i8) {
        if i != j {
            self.entries[i][j] = v;
        }
    }

    pub fn forbid_path(&mut self, from: usize, to: usize) {
        self.set(to, from, FORBIDDEN);
    }

    pub fn require_path(&mut self, from: usize, to: usize) -> Result<()> {
        self.set(to, from, REQUIRED);
        self.check_consistent()
    }

    pub fn entries(&self) -> &[Vec<i8>] {
        &self.entries
    }

    /// Every incoming path forbidden.
    pub fn is_exogenous(&self, i: usize) -> bool {
        self.size() > 1 && (0..self.size()).all(|j| j == i || self.entries[i][j] == FORBIDDEN)
    }

    /// Whether `v` may be placed next while `remaining` (which contains `v`)
    /// is still unordered: no required ancestor of `v` is pending, and no
    /// pending `u` is barred from descending from `v` unless `u` is itself
    /// barred from preceding `v`.
    pub(crate) fn admissible(&self, v: usize, remaining: &[usize]) -> bool {
        remaining.iter().all(|&u| {
            u == v || !(self.get(v, u) == REQUIRED || (self.get(u, v) == FORBIDDEN && self.get(v, u) != FORBIDDEN))
        })
    }

    /// Relabels variables: new index `k` is old index `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> PriorKnowledge {
        let entries = perm.iter().map(|&i| perm.iter().map(|&j| self.entries[i][j]).collect()).collect();
        PriorKnowledge { entries }
    }

    fn check_consistent(&self) -> Result<()> {
        let p = self.size();
        for i in 0..p {
            for j in 0..i {
                if self.entries[i][j] == REQUIRED && self.entries[j][i] == REQUIRED {
                    return Err(LingamError::InvalidPrior(format!(
                        "paths required in both directions between {i} and {j}"
                    )));
                }
            }
        }
        Ok(())
    }
}

impl TryFrom<Vec<Vec<i8>>> for PriorKnowledge {
    type Error = LingamError;
    fn try_from(v: Vec<Vec<i8>>) -> Result<Self> {
        PriorKnowledge::from_matrix(v)
    }
}

impl From<PriorKnowledge> for Vec<Vec<i8>> {
    fn from(pk: PriorKnowledge) -> Self {
        pk.entries
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names() -> Vec<&'static str> {
        vec!["Q1", "Q2", "CIT", "CT"]
    }

    #[test]
    fn roles_encode_rows_and_columns() {
        let pk = PriorKnowledge::from_roles(&names(), &["Q1"], &["CIT", "CT"], SinkEdges::Forbidden).unwrap();
        assert!(pk.is_exogenous(0));
        assert!(!pk.is_exogenous(1));
        assert_eq!(pk.get(1, 2), FORBIDDEN);
        assert_eq!(pk.get(3, 2), FORBIDDEN);
        assert_eq!(pk.get(2, 1), UNKNOWN);
        let loose = PriorKnowledge::from_roles(&names(), &["Q1"], &["CIT", "CT"], SinkEdges::AllowedAmongSinks).unwrap();
        assert_eq!(loose.get(3, 2), UNKNOWN);
        assert_eq!(loose.get(1, 2), FORBIDDEN);
    }

    #[test]
    fn admissibility() {
        let pk = PriorKnowledge::from_roles(&names(), &["Q1"], &["CIT", "CT"], SinkEdges::Forbidden).unwrap();
        let all = [0, 1, 2, 3];
        assert!(pk.admissible(0, &all));
        assert!(!pk.admissible(1, &all));
        assert!(!pk.admissible(2, &all));
        assert!(pk.admissible(1, &[1, 2, 3]));
        assert!(!pk.admissible(3, &[1, 2, 3]));
        assert!(pk.admissible(2, &[2, 3]) && pk.admissible(3, &[2, 3]));

        let mut req = PriorKnowledge::unknown(3);
        req.require_path(2, 0).unwrap();
        assert!(!req.admissible(0, &[0, 1, 2]));
        assert!(req.admissible(0, &[0, 1]));
    }

    #[test]
    fn rejects_contradictions() {
        let mut pk = PriorKnowledge::unknown(2);
        pk.require_path(0, 1).unwrap();
        assert!(pk.require_path(1, 0).is_err());
        assert!(PriorKnowledge::from_matrix(vec![vec![-1, 2], vec![0, -1]]).is_err());
        assert!(PriorKnowledge::from_roles(&["a", "b"], &["a"], &["a"], SinkEdges::Forbidden).is_err());
        assert!(matches!(
            PriorKnowledge::from_roles(&["a", "b"], &["z"], &[], SinkEdges::Forbidden),
            Err(LingamError::UnknownVariable(_))
        ));
    }

    #[test]
    fn diagonal_is_ignored_and_json_roundtrips() {
        let pk = PriorKnowledge::from_matrix(vec![vec![0, 0], vec![-1, 1]]).unwrap();
        assert_eq!(pk.get(0, 0), UNKNOWN);
        assert_eq!(pk.get(1, 1), UNKNOWN);
        let text = serde_json::to_string(&pk).unwrap();
        assert_eq!(text, "[[-1,0],[-1,-1]]");
        assert_eq!(serde_json::from_str::<PriorKnowledge>(&text).unwrap(), pk);
    }
}
