mod common;

use common::*;
use lingam_pipeline::dataset::DataMatrix;
use lingam_pipeline::fit::{
    baseline_chi_square, chi_square, fit_indices, implied_covariance, model_dof, refit_structure, score_model, CovariancePair,
};
use lingam_pipeline::lingam::{fit, CausalModel, LingamOptions};
use lingam_pipeline::synth::{self, generate};
use proptest::prelude::*;

fn structure_of(adjacency: &[Vec<f64>], names: &[String]) -> CausalModel {
    let p = names.len();
    CausalModel {
        variable_names: names.to_vec(),
        causal_order: (0..p).collect(),
        adjacency: adjacency.to_vec(),
        residual_variances: vec![1.0; p],
        standardized: false,
    }
}

fn saturated(p: usize, names: &[String]) -> CausalModel {
    let adjacency = (0..p).map(|i| (0..p).map(|j| if j < i { 1.0 } else { 0.0 }).collect()).collect::<Vec<_>>();
    structure_of(&adjacency, names)
}

#[test]
fn saturated_model_reproduces_the_sample_covariance() {
    let (_, m) = synth::paper_shaped_fixture(1);
    let model = refit_structure(&saturated(9, m.names()), &m).unwrap();
    let sigma = implied_covariance(&model).unwrap();
    let s = m.covariance();
    for i in 0..9 {
        for j in 0..9 {
            assert!((sigma[i][j] - s[i][j]).abs() < 1e-9);
        }
    }
    let chi = chi_square(&model, &m).unwrap();
    assert!(chi.chi_square.abs() < 1e-6);
    assert_eq!(chi.dof, 0);
    assert_eq!(chi.p_value, None);
    let base = baseline_chi_square(&m).unwrap();
    let f = fit_indices(chi.chi_square, chi.dof, base.chi_square, base.dof, m.nrows(), Some(CovariancePair { implied: &sigma, sample: &s }))
        .unwrap();
    assert_eq!(f.cfi, 1.0);
    assert_eq!(f.rmsea, 0.0);
    assert!((f.gfi.unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn fixture_structure_has_22_dof_and_fits() {
    let (truth, m) = synth::paper_shaped_fixture(2);
    let model = fit(&m, &fixture_prior(), &LingamOptions::default()).unwrap();
    let base = baseline_chi_square(&m).unwrap();
    assert_eq!(base.dof, 36);
    let f = score_model(&model, &m, base).unwrap();
    assert_eq!(f.dof, model_dof(9, model.edge_count()));
    assert!(base.chi_square > f.chi_square);
    assert!(f.cfi > 0.95 && f.rmsea < 0.07);
    let true_structure = structure_of(&truth.adjacency, m.names());
    assert_eq!(score_model(&true_structure, &m, base).unwrap().dof, 22);
}

#[test]
fn refit_implied_covariance_tracks_the_sample() {
    let model = synth::fixture_model();
    let m = generate(&model, 20_000, 3).unwrap();
    let refit = refit_structure(&structure_of(&model.adjacency, m.names()), &m).unwrap();
    let sigma = implied_covariance(&refit).unwrap();
    let s = m.covariance();
    for i in 0..9 {
        for j in 0..9 {
            assert!((sigma[i][j] - s[i][j]).abs() < 0.05, "({i},{j})");
        }
    }
}

#[test]
fn chi_square_p_values_are_uniform_under_the_true_structure() {
    let model = synth::fixture_model();
    let p_values: Vec<f64> = (0..100u64)
        .map(|seed| {
            let m = generate(&model, 2000, 7000 + seed).unwrap();
            let refit = refit_structure(&structure_of(&model.adjacency, m.names()), &m).unwrap();
            chi_square(&refit, &m).unwrap().p_value.unwrap()
        })
        .collect();
    let (d, p) = ks_uniform(&p_values);
    assert!(p > 0.01, "KS D = {d}, p = {p}");
}

#[test]
fn baseline_grows_linearly_with_n() {
    let a: Vec<f64> = (0..200).map(|i| ((i * 37) % 101) as f64).collect();
    let b: Vec<f64> = a.iter().enumerate().map(|(i, v)| v + ((i * 13) % 7) as f64).collect();
    let m1 = DataMatrix::from_columns(vec!["a".into(), "b".into()], vec![a.clone(), b.clone()]).unwrap();
    let a2: Vec<f64> = a.iter().chain(&a).copied().collect();
    let b2: Vec<f64> = b.iter().chain(&b).copied().collect();
    let m2 = DataMatrix::from_columns(vec!["a".into(), "b".into()], vec![a2, b2]).unwrap();
    let (c1, c2) = (baseline_chi_square(&m1).unwrap().chi_square, baseline_chi_square(&m2).unwrap().chi_square);
    // Doubling the rows keeps the correlation; χ²_b scales with N − 1 up to the divisor change.
    let r1 = c1 / 199.0;
    let r2 = c2 / 399.0;
    assert!(c1 > 100.0);
    assert!((r1 - r2).abs() / r1 < 0.01, "{r1} vs {r2}");
}

#[test]
fn diagonal_sample_covariance_has_zero_baseline() {
    let m = DataMatrix::from_columns(
        vec!["a".into(), "b".into()],
        vec![vec![1.0, -1.0, 1.0, -1.0], vec![1.0, 1.0, -1.0, -1.0]],
    )
    .unwrap();
    assert!(baseline_chi_square(&m).unwrap().chi_square.abs() < 1e-12);
}

proptest! {
    #[test]
    fn rmsea_is_monotone_in_chi(c1 in 0.0f64..200.0, c2 in 0.0f64..200.0, dof in 1i64..40) {
        let (lo, hi) = if c1 <= c2 { (c1, c2) } else { (c2, c1) };
        let f_lo = fit_indices(lo, dof, 1000.0, 36, 504, None).unwrap();
        let f_hi = fit_indices(hi, dof, 1000.0, 36, 504, None).unwrap();
        prop_assert!(f_lo.rmsea <= f_hi.rmsea);
        prop_assert!(f_lo.rmsea >= 0.0);
    }
}
