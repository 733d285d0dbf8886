use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::CliError;
use crate::bootstrap::DEFAULT_PRUNE_THRESHOLD;
use crate::dataset::{Aggregation, Measure, Schema};
use crate::lingam::{LingamOptions, SinkEdges};
use crate::stats::CompareOptions;

/// Everything a pipeline run depends on. Loaded from TOML; command-line
/// flags override individual fields afterwards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub input: PathBuf,
    pub schema: Schema,
    /// Variables handed to discovery, in column order.
    pub variables: Vec<String>,
    pub exogenous: Vec<String>,
    pub sinks: Vec<String>,
    pub sink_edges: SinkEdges,
    /// Row unit for discovery and the descriptive block.
    pub aggregation: Aggregation,
    /// Condition order for descriptives and comparisons.
    pub conditions: Vec<String>,
    pub bootstrap_count: usize,
    pub prune_threshold: f64,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub lingam: LingamOptions,
    pub compare: CompareOptions,
    /// Factors compared across conditions; defaults to `variables`.
    pub factors: Option<Vec<String>>,
    /// Baseline dof used for the incremental fit indices instead of p(p−1)/2.
    pub baseline_dof: Option<i64>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            input: PathBuf::from("trials.csv"),
            schema: Schema::default(),
            variables: Measure::ALL.iter().map(|m| m.label().to_string()).collect(),
            exogenous: vec!["Q1".into()],
            sinks: vec!["CIT".into(), "CT".into(), "ACT".into()],
            sink_edges: SinkEdges::default(),
            aggregation: Aggregation::default(),
            conditions: vec!["non".into(), "early".into(), "sync".into(), "late".into()],
            bootstrap_count: 5000,
            prune_threshold: DEFAULT_PRUNE_THRESHOLD,
            seed: 0,
            output_dir: PathBuf::from("out"),
            lingam: LingamOptions::default(),
            compare: CompareOptions::default(),
            factors: None,
            baseline_dof: None,
        }
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e })?;
        let mut cfg: PipelineConfig =
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        // Relative paths in a config file are relative to the file.
        if let Some(dir) = path.parent() {
            for p in [&mut cfg.input, &mut cfg.output_dir] {
                if p.is_relative() && !dir.as_os_str().is_empty() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let err = |m: String| Err(CliError::Config(m));
        if self.variables.len() < 2 {
            return err("at least two variables are required".into());
        }
        for v in &self.variables {
            if v.parse::<Measure>().is_err() {
                return err(format!("unknown variable `{v}`"));
            }
        }
        for label in self.exogenous.iter().chain(&self.sinks) {
            if !self.variables.contains(label) {
                return err(format!("`{label}` is not among the configured variables"));
            }
        }
        if let Some(both) = self.exogenous.iter().find(|e| self.sinks.contains(e)) {
            return err(format!("`{both}` is listed as both exogenous and sink"));
        }
        if self.bootstrap_count == 0 {
            return err("bootstrap_count must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.prune_threshold) {
            return err(format!("prune_threshold {} outside [0, 1]", self.prune_threshold));
        }
        if self.conditions.len() < 2 {
            return err("at least two conditions are required".into());
        }
        if let Some(d) = self.baseline_dof {
            if d <= 0 {
                return err("baseline_dof must be positive".into());
            }
        }
        for f in self.factors() {
            if f.parse::<Measure>().is_err() {
                return err(format!("unknown factor `{f}`"));
            }
        }
        Ok(())
    }

    pub fn factors(&self) -> &[String] {
        self.factors.as_deref().unwrap_or(&self.variables)
    }

    /// First 12 hex digits of SHA-256 over the analysis settings (output
    /// location excluded) and the input file's bytes.
    pub fn artifact_key(&self, input_bytes: &[u8]) -> String {
        let mut keyed = self.clone();
        keyed.output_dir = PathBuf::new();
        let mut h = Sha256::new();
        h.update(serde_json::to_vec(&keyed).expect("config serializes"));
        h.update([0u8]);
        h.update(Sha256::digest(input_bytes));
        hex::encode(h.finalize())[..12].to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_roundtrip() {
        let cfg = PipelineConfig::default();
        cfg.validate().unwrap();
        let text = toml::to_string(&cfg).unwrap();
        assert_eq!(toml::from_str::<PipelineConfig>(&text).unwrap(), cfg);
    }

    #[test]
    fn overlapping_roles_rejected() {
        let cfg = PipelineConfig { sinks: vec!["Q1".into()], ..Default::default() };
        assert!(matches!(cfg.validate(), Err(CliError::Config(m)) if m.contains("both")));
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(toml::from_str::<PipelineConfig>("bogus = 1").is_err());
    }

    #[test]
    fn artifact_key_ignores_output_dir() {
        let a = PipelineConfig::default();
        let b = PipelineConfig { output_dir: "elsewhere".into(), ..Default::default() };
        assert_eq!(a.artifact_key(b"x"), b.artifact_key(b"x"));
        assert_ne!(a.artifact_key(b"x"), a.artifact_key(b"y"));
        let c = PipelineConfig { seed: 1, ..Default::default() };
        assert_ne!(a.artifact_key(b"x"), c.artifact_key(b"x"));
    }
}
