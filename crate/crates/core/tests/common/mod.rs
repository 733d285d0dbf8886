#![allow(dead_code)]

use lingam_pipeline::lingam::{PriorKnowledge, SinkEdges};
use lingam_pipeline::synth::{ErrorDist, GroundTruthModel, FIXTURE_ORDER};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Exogenous Q1, sinks CIT/CT/ACT that cause nothing.
pub fn fixture_prior() -> PriorKnowledge {
    PriorKnowledge::from_roles(&FIXTURE_ORDER, &["Q1"], &["CIT", "CT", "ACT"], SinkEdges::Forbidden).unwrap()
}

/// Sum over all directed paths from `from` to `to` of the product of edge weights.
pub fn path_sum(a: &[Vec<f64>], from: usize, to: usize) -> f64 {
    fn walk(a: &[Vec<f64>], at: usize, to: usize, product: f64, acc: &mut f64) {
        if at == to {
            *acc += product;
            return;
        }
        for next in 0..a.len() {
            if a[next][at] != 0.0 {
                walk(a, next, to, product * a[next][at], acc);
            }
        }
    }
    if from == to {
        return 0.0;
    }
    let mut acc = 0.0;
    walk(a, from, to, 1.0, &mut acc);
    acc
}

/// Random DAG on `p` nodes with a hidden random order and edge density ½.
pub fn random_dag(p: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut order: Vec<usize> = (0..p).collect();
    order.shuffle(rng);
    let mut a = vec![vec![0.0; p]; p];
    for i in 0..p {
        for j in 0..i {
            if rng.random_bool(0.5) {
                let w: f64 = rng.random_range(0.2..1.5) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                a[order[i]][order[j]] = w;
            }
        }
    }
    a
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Two variables, `x1 → x2` with weight `a`, uniform errors.
pub fn chain2(a: f64) -> GroundTruthModel {
    GroundTruthModel {
        variable_names: vec!["x1".into(), "x2".into()],
        adjacency: vec![vec![0.0, 0.0], vec![a, 0.0]],
        errors: vec![ErrorDist::Uniform { scale: 1.0 }; 2],
    }
}

/// `x1 → x2` with weight `a` plus an unrelated `x3`.
pub fn chain_with_null(a: f64) -> GroundTruthModel {
    GroundTruthModel {
        variable_names: vec!["x1".into(), "x2".into(), "x3".into()],
        adjacency: vec![vec![0.0; 3], vec![a, 0.0, 0.0], vec![0.0; 3]],
        errors: vec![ErrorDist::Uniform { scale: 1.0 }; 3],
    }
}

/// Every ground-truth edge j → i has j before i in `order` (indices shared with the truth).
pub fn order_consistent(truth: &[Vec<f64>], order: &[usize]) -> bool {
    let mut rank = vec![0; order.len()];
    for (pos, &v) in order.iter().enumerate() {
        rank[v] = pos;
    }
    (0..truth.len()).all(|i| (0..truth.len()).all(|j| truth[i][j] == 0.0 || rank[j] < rank[i]))
}

/// One-sample Kolmogorov–Smirnov test against U(0,1); returns (D, asymptotic p).
pub fn ks_uniform(sample: &[f64]) -> (f64, f64) {
    let mut v = sample.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let d = v
        .iter()
        .enumerate()
        .map(|(i, &x)| ((i as f64 + 1.0) / n - x).max(x - i as f64 / n))
        .fold(0.0f64, f64::max);
    let lambda = (n.sqrt() + 0.12 + 0.11 / n.sqrt()) * d;
    let p: f64 = (1..=100)
        .map(|k| {
            let k = k as f64;
            2.0 * (-1f64).powf(k - 1.0) * (-2.0 * k * k * lambda * lambda).exp()
        })
        .sum();
    (d, p.clamp(0.0, 1.0))
}

pub fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}
