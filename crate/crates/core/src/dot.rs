//! Graphviz DOT rendering of fitted and bootstrapped graphs.

use std::fmt::Write;

use crate::bootstrap::BootstrapSummary;
use crate::lingam::CausalModel;

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn header(out: &mut String, graph: &str, names: &[String]) {
    let _ = writeln!(out, "digraph {graph} {{");
    let _ = writeln!(out, "  rankdir=LR;");
    for n in names {
        let _ = writeln!(out, "  {};", quote(n));
    }
}

/// Nodes in variable order; one edge per nonzero direct effect, labelled to two decimals.
pub fn model_dot(model: &CausalModel) -> String {
    let mut out = String::new();
    header(&mut out, "causal_model", &model.variable_names);
    for &from in &model.causal_order {
        for &to in &model.causal_order {
            let a = model.adjacency[to][from];
            if a != 0.0 {
                let _ = writeln!(
                    out,
                    "  {} -> {} [label=\"{:.2}\"];",
                    quote(&model.variable_names[from]),
                    quote(&model.variable_names[to]),
                    a
                );
            }
        }
    }
    out.push_str("}\n");
    out
}

/// Edges whose probability is at least `threshold`, labelled "effect (prob%)".
pub fn bootstrap_dot(summary: &BootstrapSummary, threshold: f64) -> String {
    let mut out = String::new();
    header(&mut out, "bootstrap_model", &summary.variable_names);
    let p = summary.p();
    for from in 0..p {
        for to in 0..p {
            let prob = summary.edge_probability[to][from];
            let effect = summary.median_direct_effect[to][from];
            if prob > 0.0 && prob >= threshold && effect != 0.0 {
                let _ = writeln!(
                    out,
                    "  {} -> {} [label=\"{:.2} ({:.0}%)\"];",
                    quote(&summary.variable_names[from]),
                    quote(&summary.variable_names[to]),
                    effect,
                    prob * 100.0
                );
            }
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_edges_are_labelled() {
        let model = CausalModel {
            variable_names: vec!["a".into(), "b \"x\"".into()],
            causal_order: vec![0, 1],
            adjacency: vec![vec![0.0, 0.0], vec![0.456, 0.0]],
            residual_variances: vec![1.0, 1.0],
            standardized: true,
        };
        let dot = model_dot(&model);
        assert!(dot.starts_with("digraph causal_model {"));
        assert!(dot.contains("\"a\" -> \"b \\\"x\\\"\" [label=\"0.46\"];"));
        assert!(dot.trim_end().ends_with('}'));
    }
}
