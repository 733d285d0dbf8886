use serde::{Deserialize, Serialize};

use super::{LingamError, Result};
use crate::dataset::{standardize, DataMatrix};
use crate::stats::{shapiro_wilk, ShapiroWilk};

/// A fitted DAG. `adjacency[i][j]` is the direct effect of variable j on i.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CausalModel {
    pub variable_names: Vec<String>,
    pub causal_order: Vec<usize>,
    pub adjacency: Vec<Vec<f64>>,
    pub residual_variances: Vec<f64>,
    /// Whether the model was fitted on z-scored columns.
    #[serde(default)]
    pub standardized: bool,
}

impl CausalModel {
    pub fn p(&self) -> usize {
        self.variable_names.len()
    }

    /// Checks shapes and that `adjacency` is strictly lower triangular under `causal_order`.
    pub fn validate(&self) -> Result<()> {
        let p = self.p();
        if self.adjacency.len() != p || self.adjacency.iter().any(|r| r.len() != p) || self.residual_variances.len() != p {
            return Err(LingamError::Shape(format!("model arrays must be sized for {p} variables")));
        }
        let mut rank = vec![usize::MAX; p];
        for (pos, &v) in self.causal_order.iter().enumerate() {
            if v >= p || rank[v] != usize::MAX {
                return Err(LingamError::InvalidOrder);
            }
            rank[v] = pos;
        }
        if self.causal_order.len() != p {
            return Err(LingamError::InvalidOrder);
        }
        for i in 0..p {
            for j in 0..p {
                if self.adjacency[i][j] != 0.0 && rank[j] >= rank[i] {
                    return Err(LingamError::NotAcyclic);
                }
            }
        }
        if self.residual_variances.iter().any(|v| !(*v >= 0.0)) {
            return Err(LingamError::Shape("residual variances must be nonnegative".into()));
        }
        Ok(())
    }

    /// (from, to, effect) for every nonzero entry, in row-major order.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for (i, row) in self.adjacency.iter().enumerate() {
            for (j, &a) in row.iter().enumerate() {
                if a != 0.0 {
                    out.push((j, i, a));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.edges().len()
    }

    /// `reach[from][to]`: a directed path of length ≥ 1 exists.
    pub fn reachability(&self) -> Vec<Vec<bool>> {
        reachability(&self.adjacency)
    }

    /// e = x − A x on the same scale the model was fitted on.
    pub fn structural_residuals(&self, m: &DataMatrix) -> Result<DataMatrix> {
        let m = m.select_columns(&self.variable_names)?;
        let m = if self.standardized { standardize(&m)? } else { m };
        let n = m.nrows();
        let cols: Vec<Vec<f64>> = (0..self.p())
            .map(|i| {
                (0..n)
                    .map(|r| {
                        m.column(i)[r]
                            - self.adjacency[i].iter().enumerate().map(|(j, a)| a * m.column(j)[r]).sum::<f64>()
                    })
                    .collect()
            })
            .collect();
        Ok(DataMatrix::from_columns(self.variable_names.clone(), cols)?)
    }
}

/// Transitive closure of the edge relation of `adjacency` (row = effect).
pub fn reachability(adjacency: &[Vec<f64>]) -> Vec<Vec<bool>> {
    let p = adjacency.len();
    let mut reach: Vec<Vec<bool>> = (0..p).map(|from| (0..p).map(|to| adjacency[to][from] != 0.0).collect()).collect();
    for k in 0..p {
        for i in 0..p {
            if reach[i][k] {
                for j in 0..p {
                    if reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    reach
}

/// A topological order of the graph (lowest index first among ready
/// variables), or `None` if it has a cycle.
pub fn topological_order(adjacency: &[Vec<f64>]) -> Option<Vec<usize>> {
    let p = adjacency.len();
    let mut indegree: Vec<usize> = (0..p).map(|i| adjacency[i].iter().filter(|a| **a != 0.0).count()).collect();
    let mut placed = vec![false; p];
    let mut order = Vec::with_capacity(p);
    while order.len() < p {
        let next = (0..p).find(|&v| !placed[v] && indegree[v] == 0)?;
        placed[next] = true;
        order.push(next);
        for i in 0..p {
            if adjacency[i][next] != 0.0 {
                indegree[i] -= 1;
            }
        }
    }
    Some(order)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualNormality {
    pub variable: String,
    pub w: f64,
    pub p_value: f64,
}

/// Shapiro–Wilk on each structural residual.
pub fn residual_normality_audit(model: &CausalModel, m: &DataMatrix) -> Result<Vec<ResidualNormality>> {
    let e = model.structural_residuals(m)?;
    e.names()
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let ShapiroWilk { w, p_value, .. } = shapiro_wilk(e.column(i))?;
            Ok(ResidualNormality { variable: name.clone(), w, p_value })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain3() -> Vec<Vec<f64>> {
        vec![vec![0.0, 0.0, 0.0], vec![0.5, 0.0, 0.0], vec![0.0, -1.0, 0.0]]
    }

    #[test]
    fn reachability_is_transitive() {
        let r = reachability(&chain3());
        assert!(r[0][1] && r[1][2] && r[0][2]);
        assert!(!r[2][0] && !r[1][0] && !r[0][0]);
    }

    #[test]
    fn topological_order_detects_cycles() {
        assert_eq!(topological_order(&chain3()), Some(vec![0, 1, 2]));
        let mut cyc = chain3();
        cyc[0][2] = 0.1;
        assert_eq!(topological_order(&cyc), None);
    }

    #[test]
    fn validate_flags_order_violations() {
        let mut m = CausalModel {
            variable_names: vec!["a".into(), "b".into(), "c".into()],
            causal_order: vec![0, 1, 2],
            adjacency: chain3(),
            residual_variances: vec![1.0; 3],
            standardized: false,
        };
        m.validate().unwrap();
        m.causal_order = vec![1, 0, 2];
        assert!(matches!(m.validate(), Err(LingamError::NotAcyclic)));
        m.causal_order = vec![0, 0, 2];
        assert!(matches!(m.validate(), Err(LingamError::InvalidOrder)));
    }

    #[test]
    fn residuals_undo_the_structure() {
        let model = CausalModel {
            variable_names: vec!["a".into(), "b".into(), "c".into()],
            causal_order: vec![0, 1, 2],
            adjacency: chain3(),
            residual_variances: vec![1.0; 3],
            standardized: false,
        };
        let e = [[1.0, 0.5, -0.2], [-1.0, 0.1, 0.3], [0.4, -0.6, 0.9]];
        let rows: Vec<Vec<f64>> = e
            .iter()
            .map(|e| {
                let a = e[0];
                let b = 0.5 * a + e[1];
                let c = -b + e[2];
                vec![a, b, c]
            })
            .collect();
        let m = DataMatrix::from_rows(model.variable_names.clone(), &rows).unwrap();
        let r = model.structural_residuals(&m).unwrap();
        for (i, row) in e.iter().enumerate() {
            for j in 0..3 {
                assert!((r.column(j)[i] - row[j]).abs() < 1e-12);
            }
        }
        assert!(residual_normality_audit(&model, &m.select_rows(&[0, 1])).is_err());
    }
}
