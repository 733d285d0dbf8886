use super::{BootstrapError, Result};
use crate::lingam::{topological_order, CausalModel};

/// T = (I − A)⁻¹ − I, built by propagating along the causal order:
/// T[i][j] = A[i][j] + Σ_k A[i][k]·T[k][j].
pub fn total_effects(model: &CausalModel) -> Result<Vec<Vec<f64>>> {
    model.validate().map_err(|_| BootstrapError::NotAcyclic)?;
    Ok(propagate(&model.adjacency, &model.causal_order))
}

/// Same as [`total_effects`] for a bare adjacency matrix; the order is recovered topologically.
pub fn total_effects_from_adjacency(adjacency: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let order = topological_order(adjacency).ok_or(BootstrapError::NotAcyclic)?;
    Ok(propagate(adjacency, &order))
}

fn propagate(a: &[Vec<f64>], order: &[usize]) -> Vec<Vec<f64>> {
    let p = a.len();
    let mut t = vec![vec![0.0; p]; p];
    for (pos, &i) in order.iter().enumerate() {
        let mut row = a[i].clone();
        for &k in &order[..pos] {
            if a[i][k] != 0.0 {
                for &j in &order[..pos] {
                    row[j] += a[i][k] * t[k][j];
                }
            }
        }
        t[i] = row;
    }
    t
}
