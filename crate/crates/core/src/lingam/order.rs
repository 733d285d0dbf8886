use super::entropy::{entropy_approx, pair_statistic, residual, standardized, EntropyConstants};
use super::{LingamError, PriorKnowledge, Result};
use crate::dataset::DataMatrix;

/// Scores closer than this are ties, resolved towards the canonically first name.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Stage 1: repeatedly picks the admissible variable whose pairwise
/// statistics against every other remaining variable are least negative,
/// then regresses it out of the rest.
pub fn search_causal_order(m: &DataMatrix, pk: &PriorKnowledge, c: &EntropyConstants) -> Result<Vec<usize>> {
    let (n, p) = (m.nrows(), m.ncols());
    check_shape(n, p, pk)?;

    // Canonical order: by name. Every loop below walks it.
    let mut canonical: Vec<usize> = (0..p).collect();
    canonical.sort_by(|&a, &b| m.names()[a].cmp(&m.names()[b]));

    let mut work: Vec<Vec<f64>> = m.columns().to_vec();
    let mut remaining = canonical;
    let mut order = Vec::with_capacity(p);

    while !remaining.is_empty() {
        let candidates: Vec<usize> = remaining.iter().copied().filter(|&v| pk.admissible(v, &remaining)).collect();
        let chosen = match candidates.len() {
            0 => {
                return Err(LingamError::Unsatisfiable {
                    remaining: remaining.iter().map(|&v| m.names()[v].clone()).collect(),
                })
            }
            1 => candidates[0],
            _ => pick_most_exogenous(&work, &remaining, &candidates, c, m.names())?,
        };
        order.push(chosen);
        remaining.retain(|&v| v != chosen);
        let exo = std::mem::take(&mut work[chosen]);
        for &v in &remaining {
            work[v] = residual(&work[v], &exo)?;
        }
        work[chosen] = exo;
    }
    Ok(order)
}

pub(crate) fn check_shape(n: usize, p: usize, pk: &PriorKnowledge) -> Result<()> {
    if p < 2 {
        return Err(LingamError::TooFewVariables(p));
    }
    if n <= p {
        return Err(LingamError::TooFewObservations { n, p });
    }
    if pk.size() != p {
        return Err(LingamError::PriorSize { expected: p, got: pk.size() });
    }
    Ok(())
}

fn pick_most_exogenous(
    work: &[Vec<f64>],
    remaining: &[usize],
    candidates: &[usize],
    c: &EntropyConstants,
    names: &[String],
) -> Result<usize> {
    let z: Vec<Option<Vec<f64>>> = (0..work.len())
        .map(|v| {
            if remaining.contains(&v) {
                standardized(&work[v])
                    .map(Some)
                    .map_err(|_| LingamError::Degenerate(names[v].clone()))
            } else {
                Ok(None)
            }
        })
        .collect::<Result<_>>()?;
    let z = |v: usize| z[v].as_deref().expect("remaining variable");
    let mut h = vec![0.0; work.len()];
    for &v in remaining {
        h[v] = entropy_approx(z(v), c)?;
    }

    let mut best: Option<(usize, f64)> = None;
    for &cand in candidates {
        let mut score = 0.0;
        for &other in remaining {
            if other == cand {
                continue;
            }
            // Evaluate each unordered pair in one orientation so that D(a,b) = −D(b,a) exactly.
            let pos_c = remaining.iter().position(|&v| v == cand).unwrap();
            let pos_o = remaining.iter().position(|&v| v == other).unwrap();
            let d = if pos_c < pos_o {
                pair_statistic(z(cand), z(other), h[cand], h[other], c)
            } else {
                pair_statistic(z(other), z(cand), h[other], h[cand], c).map(|d| -d)
            }
            .map_err(|_| LingamError::Degenerate(format!("{} / {}", names[cand], names[other])))?;
            score += d.min(0.0).powi(2);
        }
        match best {
            Some((_, s)) if score >= s - TIE_TOLERANCE => {}
            _ => best = Some((cand, score)),
        }
    }
    Ok(best.expect("at least two candidates").0)
}
