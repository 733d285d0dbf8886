//! Bootstrap reliability of direct and total effects.
//!
//! Run `i` of a bootstrap with master seed `s` resamples with seed
//! [`run_seed`]`(s, i)`: the (i+1)-th output of a SplitMix64 generator
//! started at `s`. Each run depends only on its own seed and results are
//! gathered by index, so the summary is the same for any thread count.

mod effects;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use effects::{total_effects, total_effects_from_adjacency};

use crate::dataset::DataMatrix;
use crate::lingam::{self, LingamError, LingamOptions, PriorKnowledge};

#[derive(Debug, Error)]
pub enum BootstrapError {
    #[error(transparent)]
    Lingam(#[from] LingamError),
    #[error("adjacency has a directed cycle")]
    NotAcyclic,
    #[error("bootstrap count must be at least 1")]
    NoRuns,
    #[error("{failed} of {total} bootstrap fits failed (limit 1%); first failure: {first}")]
    TooManyFailures { failed: usize, total: usize, first: String },
    #[error("threshold {0} outside [0, 1]")]
    Threshold(f64),
    #[error("cannot start worker pool: {0}")]
    ThreadPool(String),
}

pub type Result<T> = std::result::Result<T, BootstrapError>;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64_mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of bootstrap run `index` under `master_seed`.
pub fn run_seed(master_seed: u64, index: u64) -> u64 {
    splitmix64_mix(master_seed.wrapping_add(GOLDEN_GAMMA.wrapping_mul(index.wrapping_add(1))))
}

/// Row indices of one resample: n uniform draws with replacement.
pub fn resample_indices(n: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

pub fn resample(m: &DataMatrix, seed: u64) -> DataMatrix {
    m.select_rows(&resample_indices(m.nrows(), seed))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapOptions {
    pub count: usize,
    pub master_seed: u64,
    pub lingam: LingamOptions,
    /// Keep every run's adjacency matrix in the summary.
    pub keep_samples: bool,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl Default for BootstrapOptions {
    fn default() -> Self {
        BootstrapOptions { count: 5000, master_seed: 0, lingam: LingamOptions::default(), keep_samples: false, threads: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailedRun {
    pub run: usize,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSummary {
    pub variable_names: Vec<String>,
    pub master_seed: u64,
    /// Requested resample count.
    pub b: usize,
    /// Runs that fitted; the denominator of every probability.
    pub completed: usize,
    pub failed: Vec<FailedRun>,
    pub edge_probability: Vec<Vec<f64>>,
    /// Median over the runs where the direct effect is nonzero.
    pub median_direct_effect: Vec<Vec<f64>>,
    pub total_probability: Vec<Vec<f64>>,
    pub median_total_effect: Vec<Vec<f64>>,
    /// Set once the summary has been pruned.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prune_threshold: Option<f64>,
    /// Per-run adjacency matrices of the completed runs, by run index.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adjacency_samples: Option<Vec<Vec<Vec<f64>>>>,
}

impl BootstrapSummary {
    pub fn p(&self) -> usize {
        self.variable_names.len()
    }

    /// Percentile interval of the direct effect `from → to` over all kept
    /// runs (zeros included); `None` without samples.
    pub fn direct_effect_interval(&self, from: usize, to: usize, level: f64) -> Option<(f64, f64)> {
        let samples = self.adjacency_samples.as_ref()?;
        let mut v: Vec<f64> = samples.iter().map(|a| a[to][from]).collect();
        if v.is_empty() {
            return None;
        }
        v.sort_by(f64::total_cmp);
        let alpha = (1.0 - level) / 2.0;
        Some((quantile_sorted(&v, alpha), quantile_sorted(&v, 1.0 - alpha)))
    }
}

fn quantile_sorted(v: &[f64], q: f64) -> f64 {
    let h = (v.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

fn median(v: &mut [f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

type Run = std::result::Result<(Vec<Vec<f64>>, Vec<Vec<f64>>), String>;

fn one_run(m: &DataMatrix, pk: &PriorKnowledge, options: &BootstrapOptions, index: usize) -> Run {
    let data = resample(m, run_seed(options.master_seed, index as u64));
    let model = lingam::fit(&data, pk, &options.lingam).map_err(|e| e.to_string())?;
    let total = total_effects(&model).map_err(|e| e.to_string())?;
    Ok((model.adjacency, total))
}

/// Resample → fit → total effects, `options.count` times, then aggregate.
pub fn bootstrap_fit(m: &DataMatrix, pk: &PriorKnowledge, options: &BootstrapOptions) -> Result<BootstrapSummary> {
    if options.count == 0 {
        return Err(BootstrapError::NoRuns);
    }
    let work = || -> Vec<Run> { (0..options.count).into_par_iter().map(|i| one_run(m, pk, options, i)).collect() };
    let runs = match options.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .map_err(|e| BootstrapError::ThreadPool(e.to_string()))?
            .install(work),
        None => work(),
    };

    let p = m.ncols();
    let mut failed = Vec::new();
    let mut direct: Vec<Vec<Vec<f64>>> = vec![vec![Vec::new(); p]; p];
    let mut total: Vec<Vec<Vec<f64>>> = vec![vec![Vec::new(); p]; p];
    let mut samples = Vec::new();
    for (run, r) in runs.into_iter().enumerate() {
        match r {
            Err(error) => failed.push(FailedRun { run, error }),
            Ok((a, t)) => {
                for i in 0..p {
                    for j in 0..p {
                        if a[i][j] != 0.0 {
                            direct[i][j].push(a[i][j]);
                        }
                        if t[i][j] != 0.0 {
                            total[i][j].push(t[i][j]);
                        }
                    }
                }
                if options.keep_samples {
                    samples.push(a);
                }
            }
        }
    }
    if failed.len() * 100 > options.count {
        return Err(BootstrapError::TooManyFailures {
            failed: failed.len(),
            total: options.count,
            first: failed[0].error.clone(),
        });
    }
    let completed = options.count - failed.len();
    let prob = |cells: &Vec<Vec<Vec<f64>>>| -> Vec<Vec<f64>> {
        cells.iter().map(|row| row.iter().map(|v| v.len() as f64 / completed as f64).collect()).collect()
    };
    let med = |cells: &mut Vec<Vec<Vec<f64>>>| -> Vec<Vec<f64>> {
        cells.iter_mut().map(|row| row.iter_mut().map(|v| median(v)).collect()).collect()
    };
    Ok(BootstrapSummary {
        variable_names: m.names().to_vec(),
        master_seed: options.master_seed,
        b: options.count,
        completed,
        failed,
        edge_probability: prob(&direct),
        median_direct_effect: med(&mut direct),
        total_probability: prob(&total),
        median_total_effect: med(&mut total),
        prune_threshold: None,
        adjacency_samples: options.keep_samples.then_some(samples),
    })
}

/// Zeroes the probability and median of every direct and total entry whose
/// probability is strictly below `threshold`.
pub fn prune(summary: &BootstrapSummary, threshold: f64) -> Result<BootstrapSummary> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(BootstrapError::Threshold(threshold));
    }
    let mut s = summary.clone();
    let cut = |prob: &mut Vec<Vec<f64>>, effect: &mut Vec<Vec<f64>>| {
        for (pr, ef) in prob.iter_mut().zip(effect.iter_mut()) {
            for (p, e) in pr.iter_mut().zip(ef.iter_mut()) {
                if *p < threshold {
                    *p = 0.0;
                    *e = 0.0;
                }
            }
        }
    };
    cut(&mut s.edge_probability, &mut s.median_direct_effect);
    cut(&mut s.total_probability, &mut s.median_total_effect);
    s.prune_threshold = Some(threshold);
    Ok(s)
}

pub const DEFAULT_PRUNE_THRESHOLD: f64 = 0.30;

#[cfg(test)]
mod tests {
    use super::*;

    fn summary_with(prob: f64) -> BootstrapSummary {
        BootstrapSummary {
            variable_names: vec!["a".into(), "b".into()],
            master_seed: 0,
            b: 100,
            completed: 100,
            failed: vec![],
            edge_probability: vec![vec![0.0, 0.0], vec![prob, 0.0]],
            median_direct_effect: vec![vec![0.0, 0.0], vec![0.7, 0.0]],
            total_probability: vec![vec![0.0, 0.0], vec![prob, 0.0]],
            median_total_effect: vec![vec![0.0, 0.0], vec![0.7, 0.0]],
            prune_threshold: None,
            adjacency_samples: None,
        }
    }

    #[test]
    fn prune_boundary() {
        let s = prune(&summary_with(0.29), 0.30).unwrap();
        assert_eq!((s.edge_probability[1][0], s.median_direct_effect[1][0]), (0.0, 0.0));
        let s = prune(&summary_with(0.30), 0.30).unwrap();
        assert_eq!((s.edge_probability[1][0], s.median_direct_effect[1][0]), (0.30, 0.7));
        let orig = summary_with(0.01);
        let s = prune(&orig, 0.0).unwrap();
        assert_eq!(s.edge_probability, orig.edge_probability);
        assert_eq!(s.median_direct_effect, orig.median_direct_effect);
        assert!(prune(&orig, 1.5).is_err());
    }

    #[test]
    fn prune_is_idempotent() {
        let once = prune(&summary_with(0.2), 0.3).unwrap();
        assert_eq!(prune(&once, 0.3).unwrap(), once);
    }

    #[test]
    fn resample_is_seeded() {
        let m = DataMatrix::from_columns(vec!["x".into()], vec![vec![1.0, 2.0, 3.0, 4.0, 5.0]]).unwrap();
        assert_eq!(resample(&m, 7), resample(&m, 7));
        let one = DataMatrix::from_columns(vec!["x".into()], vec![vec![4.2]]).unwrap();
        assert_eq!(resample(&one, 3).column(0), &[4.2]);
        assert!(resample(&m, 7).column(0).iter().all(|v| m.column(0).contains(v)));
    }

    #[test]
    fn run_seeds_are_distinct_and_stable() {
        let seeds: std::collections::HashSet<u64> = (0..1000).map(|i| run_seed(42, i)).collect();
        assert_eq!(seeds.len(), 1000);
        // SplitMix64 reference output for state 0: first draw.
        assert_eq!(run_seed(0, 0), 0xE220_A839_7B1D_CDAF);
    }

    #[test]
    fn median_of_nonzero_values() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0]), 2.5);
        assert_eq!(median(&mut []), 0.0);
    }
}
