//! Plain-text renderings of the analysis results as aligned tables.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::bootstrap::BootstrapSummary;
use crate::dataset::{DescriptiveRow, SpearmanMatrix};
use crate::fit::{FitIndices, THRESHOLDS};
use crate::lingam::{CausalModel, ResidualNormality};
use crate::stats::{stars, FactorComparison};

/// Column 0 left-aligned, the rest right-aligned.
#[derive(Debug, Clone, Default)]
pub struct TextTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl TextTable {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        TextTable { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push<S: Into<String>>(&mut self, row: impl IntoIterator<Item = S>) {
        self.rows.push(row.into_iter().map(Into::into).collect());
    }

    pub fn render(&self) -> String {
        let cols = self.header.len();
        let width = |j: usize| {
            std::iter::once(&self.header)
                .chain(&self.rows)
                .map(|r| r.get(j).map_or(0, |c| c.chars().count()))
                .max()
                .unwrap_or(0)
        };
        let widths: Vec<usize> = (0..cols).map(width).collect();
        let line = |r: &[String]| {
            let cells: Vec<String> = (0..cols)
                .map(|j| {
                    let c = r.get(j).map_or("", String::as_str);
                    if j == 0 {
                        format!("{c:<w$}", w = widths[j])
                    } else {
                        format!("{c:>w$}", w = widths[j])
                    }
                })
                .collect();
            cells.join("  ").trim_end().to_string()
        };
        let mut out = line(&self.header);
        out.push('\n');
        out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * cols.saturating_sub(1)));
        out.push('\n');
        for r in &self.rows {
            out.push_str(&line(r));
            out.push('\n');
        }
        out
    }
}

fn f3(v: f64) -> String {
    format!("{v:.3}")
}

fn opt3(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), f3)
}

/// p-values as ".023", with "<.001" below the smallest printed value.
pub fn format_p(p: f64) -> String {
    if p < 0.001 {
        "<.001".to_string()
    } else {
        let s = format!("{p:.3}");
        s.strip_prefix('0').map(str::to_string).unwrap_or(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionDescriptives {
    pub condition: String,
    pub rows: Vec<DescriptiveRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescribeReport {
    pub n_trials: usize,
    pub variables: Vec<String>,
    pub by_condition: Vec<ConditionDescriptives>,
    pub overall: Vec<DescriptiveRow>,
    pub spearman: SpearmanMatrix,
    /// Infinite for an exactly collinear column.
    pub vif: Vec<f64>,
}

pub fn describe_text(r: &DescribeReport) -> String {
    let mut header = vec!["Variable".to_string()];
    header.extend(r.by_condition.iter().map(|c| format!("{} M (SD)", c.condition)));
    header.push("All M (SD)".into());
    header.push("VIF".into());
    let mut t = TextTable::new(header);
    for (i, name) in r.variables.iter().enumerate() {
        let ms = |d: &DescriptiveRow| format!("{:.2} ({:.2})", d.mean, d.std);
        let mut row = vec![name.clone()];
        row.extend(r.by_condition.iter().map(|c| ms(&c.rows[i])));
        row.push(ms(&r.overall[i]));
        row.push(if r.vif[i].is_finite() { format!("{:.2}", r.vif[i]) } else { "inf".into() });
        t.push(row);
    }
    let mut c = TextTable::new(std::iter::once(String::new()).chain(r.spearman.names.iter().cloned()));
    for (i, name) in r.spearman.names.iter().enumerate() {
        let mut row = vec![name.clone()];
        for j in 0..r.spearman.names.len() {
            row.push(match (j.cmp(&i), r.spearman.rho[i][j], r.spearman.p_value[i][j]) {
                (std::cmp::Ordering::Greater, ..) => String::new(),
                (std::cmp::Ordering::Equal, ..) => "-".into(),
                (_, Some(rho), Some(p)) => format!("{rho:.2}{}", stars(p)),
                _ => "n/a".into(),
            });
        }
        c.push(row);
    }
    format!(
        "Descriptive statistics (N = {} trials)\n{}\nSpearman correlations (*: p<.05, **: p<.01, ***: p<.001)\n{}",
        r.n_trials,
        t.render(),
        c.render()
    )
}

pub fn model_text(model: &CausalModel, audit: &[ResidualNormality]) -> String {
    let names = &model.variable_names;
    let mut out = String::new();
    let order: Vec<&str> = model.causal_order.iter().map(|&i| names[i].as_str()).collect();
    let _ = writeln!(out, "Causal order: {}", order.join(" < "));
    let _ = writeln!(out, "Standardized: {}", model.standardized);
    let mut t = TextTable::new(["Cause", "Effect", "Direct effect"]);
    for &from in &model.causal_order {
        for &to in &model.causal_order {
            let a = model.adjacency[to][from];
            if a != 0.0 {
                t.push([names[from].clone(), names[to].clone(), f3(a)]);
            }
        }
    }
    out.push_str(&t.render());
    let mut a = TextTable::new(["Residual", "Variance", "Shapiro-Wilk W", "p"]);
    for (i, r) in audit.iter().enumerate() {
        a.push([r.variable.clone(), f3(model.residual_variances[i]), f3(r.w), format_p(r.p_value)]);
    }
    out.push('\n');
    out.push_str(&a.render());
    out
}

pub fn bootstrap_text(s: &BootstrapSummary) -> String {
    let names = &s.variable_names;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "Bootstrap: {} resamples, {} completed, {} failed, master seed {}",
        s.b,
        s.completed,
        s.failed.len(),
        s.master_seed
    );
    if let Some(t) = s.prune_threshold {
        let _ = writeln!(out, "Edges with probability below {:.0}% pruned", t * 100.0);
    }
    let mut t = TextTable::new(["Cause", "Effect", "Median effect", "Probability"]);
    for from in 0..s.p() {
        for to in 0..s.p() {
            let p = s.edge_probability[to][from];
            if p > 0.0 {
                t.push([names[from].clone(), names[to].clone(), f3(s.median_direct_effect[to][from]), format!("{:.1}%", p * 100.0)]);
            }
        }
    }
    out.push_str(&t.render());
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectCell {
    pub cause: String,
    pub effect: String,
    pub median_total_effect: f64,
    pub probability: f64,
}

/// Total-effect grid taken verbatim from a bootstrap summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectsReport {
    pub variable_names: Vec<String>,
    pub prune_threshold: Option<f64>,
    pub median_total_effect: Vec<Vec<f64>>,
    pub total_probability: Vec<Vec<f64>>,
    pub cells: Vec<EffectCell>,
}

impl EffectsReport {
    pub fn from_summary(s: &BootstrapSummary) -> Self {
        let mut cells = Vec::new();
        for from in 0..s.p() {
            for to in 0..s.p() {
                if s.total_probability[to][from] > 0.0 {
                    cells.push(EffectCell {
                        cause: s.variable_names[from].clone(),
                        effect: s.variable_names[to].clone(),
                        median_total_effect: s.median_total_effect[to][from],
                        probability: s.total_probability[to][from],
                    });
                }
            }
        }
        EffectsReport {
            variable_names: s.variable_names.clone(),
            prune_threshold: s.prune_threshold,
            median_total_effect: s.median_total_effect.clone(),
            total_probability: s.total_probability.clone(),
            cells,
        }
    }
}

/// Rows are causes, columns effects; pruned or absent cells stay blank.
pub fn effects_text(r: &EffectsReport) -> String {
    let mut t = TextTable::new(std::iter::once("cause \\ effect".to_string()).chain(r.variable_names.iter().cloned()));
    for (from, name) in r.variable_names.iter().enumerate() {
        let mut row = vec![name.clone()];
        for to in 0..r.variable_names.len() {
            let p = r.total_probability[to][from];
            row.push(if p > 0.0 { format!("{:.2} ({:.0}%)", r.median_total_effect[to][from], p * 100.0) } else { String::new() });
        }
        t.push(row);
    }
    format!("Median total effects (probability)\n{}", t.render())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRow {
    pub label: String,
    pub edges: usize,
    pub variables: usize,
    pub indices: FitIndices,
}

impl FitRow {
    /// "p(p+1)/2 − (edges + p) = dof".
    pub fn dof_audit(&self) -> String {
        let p = self.variables;
        format!("{} − ({} + {}) = {}", p * (p + 1) / 2, self.edges, p, self.indices.dof)
    }
}

pub fn fit_text(rows: &[FitRow]) -> String {
    let mut t = TextTable::new(["", "χ² (dof)", "p_χ²", "χ²_baseline (dof)", "CFI", "GFI", "AGFI", "NFI", "TLI", "RMSEA"]);
    for r in rows {
        let f = &r.indices;
        t.push([
            r.label.clone(),
            format!("{:.3} ({})", f.chi_square, f.dof),
            f.p_chi_square.map_or_else(|| "-".into(), format_p),
            format!("{:.3} ({})", f.baseline_chi_square, f.baseline_dof),
            f3(f.cfi),
            opt3(f.gfi),
            opt3(f.agfi),
            f3(f.nfi),
            opt3(f.tli),
            f3(f.rmsea),
        ]);
    }
    let th = |k: &str| THRESHOLDS.iter().find(|(n, _)| *n == k).map_or("-", |(_, v)| v).to_string();
    t.push([
        "Acceptable thresholds".to_string(),
        "-".into(),
        th("p_chi_square"),
        "-".into(),
        th("cfi"),
        th("gfi"),
        th("agfi"),
        th("nfi"),
        th("tli"),
        th("rmsea"),
    ]);
    let mut out = t.render();
    for r in rows.iter().filter(|r| r.variables > 0) {
        let _ = writeln!(out, "dof ({}): {}", r.label, r.dof_audit());
    }
    out
}

pub fn friedman_text(factors: &[FactorComparison]) -> String {
    let mut t = TextTable::new(["Factor", "n", "W", "ddof1", "ddof2", "F", "p"]);
    for f in factors {
        let r = &f.friedman;
        t.push([
            f.factor.clone(),
            r.n.to_string(),
            f3(r.w),
            f3(r.ddof1),
            f3(r.ddof2),
            r.f.map_or_else(|| "inf".into(), f3),
            format!("{}{}", format_p(r.p_value), stars(r.p_value)),
        ]);
    }
    format!("Friedman tests\n{}", t.render())
}

pub fn posthoc_text(factors: &[FactorComparison]) -> String {
    let mut t = TextTable::new(["Factor", "A", "B", "M (SD) A", "M (SD) B", "W", "p", "p adj", "CLES"]);
    for f in factors {
        for p in &f.pairs {
            t.push([
                f.factor.clone(),
                p.condition_a.clone(),
                p.condition_b.clone(),
                format!("{:.2} ({:.2})", p.mean_a, p.std_a),
                format!("{:.2} ({:.2})", p.mean_b, p.std_b),
                format!("{:.1}", p.w_statistic),
                format_p(p.p_raw),
                format!("{}{}", format_p(p.p_adjusted), stars(p.p_adjusted)),
                f3(p.cles),
            ]);
        }
    }
    format!("Post-hoc Wilcoxon signed-rank tests, BH-adjusted (*: p<.05, **: p<.01, ***: p<.001)\n{}", t.render())
}
