use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::{Cli, CliError, Command, CommonArgs, Format, Graph, PipelineConfig};
use crate::bootstrap::{bootstrap_fit, prune, BootstrapOptions, BootstrapSummary};
use crate::dataset::{describe, load_trials, spearman_matrix, to_matrix_with, vif, write_trials, DataMatrix, Measure, Schema, TrialRecord};
use crate::dot::{bootstrap_dot, model_dot};
use crate::fit::{baseline_chi_square, fit_indices, score_model};
use crate::lingam::{self, residual_normality_audit, topological_order, CausalModel, PriorKnowledge, ResidualNormality};
use crate::report::{self, ConditionDescriptives, DescribeReport, EffectsReport, FitRow};
use crate::stats::compare_factors;
use crate::synth;

/// What a subcommand produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    /// Content-addressed directory holding the artifacts, if any were written.
    pub artifact_dir: Option<PathBuf>,
    pub stdout: String,
}

/// Runs one subcommand. `threads` bounds bootstrap parallelism and never changes results.
pub fn run(cli: &Cli, threads: Option<usize>) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Describe(a) => cmd_describe(&Context::open(a)?, a.format),
        Command::Discover(a) => cmd_discover(&Context::open(a)?, a.format),
        Command::Bootstrap(a) => cmd_bootstrap(&Context::open(a)?, a.format, threads),
        Command::Effects(a) => cmd_effects(&Context::open(a)?, a.format),
        Command::Fit { common, replay: Some(values) } => cmd_fit_replay(values, common.format),
        Command::Fit { common, replay: None } => cmd_fit(&Context::open(common)?, common.format),
        Command::Compare(a) => cmd_compare(&Context::open(a)?, a.format),
        Command::ExportDot { common, graph } => cmd_export_dot(&Context::open(common)?, *graph),
        Command::GenerateFixture { output, seed, truth } => cmd_generate_fixture(output, *seed, truth.as_deref()),
    }
}

/// Resolved configuration, parsed input and the artifact directory.
struct Context {
    config: PipelineConfig,
    records: Vec<TrialRecord>,
    dir: PathBuf,
}

fn resolve_config(a: &CommonArgs) -> Result<PipelineConfig, CliError> {
    let mut cfg = match &a.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(v) = &a.input {
        cfg.input = v.clone();
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    if let Some(v) = a.bootstrap_count {
        cfg.bootstrap_count = v;
    }
    if let Some(v) = a.prune_threshold {
        cfg.prune_threshold = v;
    }
    if let Some(v) = &a.output_dir {
        cfg.output_dir = v.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

impl Context {
    fn open(a: &CommonArgs) -> Result<Self, CliError> {
        let config = resolve_config(a)?;
        let bytes = fs::read(&config.input).map_err(|e| CliError::Io { path: config.input.clone(), source: e })?;
        let records = load_trials(&config.input, &config.schema)?;
        let dir = config.output_dir.join(config.artifact_key(&bytes));
        Ok(Context { config, records, dir })
    }

    fn matrix(&self) -> Result<DataMatrix, CliError> {
        Ok(to_matrix_with(&self.records, &self.config.variables, self.config.aggregation)?)
    }

    fn prior(&self) -> Result<PriorKnowledge, CliError> {
        let c = &self.config;
        Ok(PriorKnowledge::from_roles(&c.variables, &c.exogenous, &c.sinks, c.sink_edges)?)
    }

    fn write(&self, name: &str, contents: &str) -> Result<(), CliError> {
        fs::create_dir_all(&self.dir).map_err(|e| CliError::Io { path: self.dir.clone(), source: e })?;
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|e| CliError::Io { path, source: e })
    }

    fn read_json<T: DeserializeOwned>(&self, name: &str) -> Result<Option<T>, CliError> {
        let path = self.dir.join(name);
        if !path.exists() {
            return Ok(None);
        }
        let text = fs::read_to_string(&path).map_err(|e| CliError::Io { path: path.clone(), source: e })?;
        serde_json::from_str(&text)
            .map(Some)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
    }

    fn outcome(&self, stdout: String) -> Outcome {
        Outcome { artifact_dir: Some(self.dir.clone()), stdout }
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

fn pick(format: Format, json: String, text: String, dot: Option<String>) -> Result<String, CliError> {
    match format {
        Format::Json => Ok(json),
        Format::Text => Ok(text),
        Format::Dot => dot.ok_or_else(|| CliError::Config("DOT output is only available for graphs".into())),
    }
}

fn cmd_describe(ctx: &Context, format: Format) -> Result<Outcome, CliError> {
    let c = &ctx.config;
    let m = ctx.matrix()?;
    let by_condition = c
        .conditions
        .iter()
        .map(|cond| {
            let subset: Vec<TrialRecord> = ctx.records.iter().filter(|r| &r.condition == cond).cloned().collect();
            let sub = to_matrix_with(&subset, &c.variables, c.aggregation)?;
            Ok(ConditionDescriptives { condition: cond.clone(), rows: describe(&sub)? })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let r = DescribeReport {
        n_trials: ctx.records.len(),
        variables: c.variables.clone(),
        by_condition,
        overall: describe(&m)?,
        spearman: spearman_matrix(&m)?,
        vif: vif(&m)?,
    };
    let (json, text) = (to_json(&r), report::describe_text(&r));
    ctx.write("describe.json", &json)?;
    ctx.write("describe.txt", &text)?;
    Ok(ctx.outcome(pick(format, json, text, None)?))
}

#[derive(Serialize)]
struct DiscoverReport<'a> {
    model: &'a CausalModel,
    residual_normality: &'a [ResidualNormality],
}

fn discover(ctx: &Context) -> Result<(CausalModel, DataMatrix), CliError> {
    let m = ctx.matrix()?;
    let model = lingam::fit(&m, &ctx.prior()?, &ctx.config.lingam)?;
    Ok((model, m))
}

fn cmd_discover(ctx: &Context, format: Format) -> Result<Outcome, CliError> {
    let (model, m) = discover(ctx)?;
    // Shapiro–Wilk is only defined for 3..=5000 observations.
    let audit = if (3..=5000).contains(&m.nrows()) { residual_normality_audit(&model, &m)? } else { Vec::new() };
    let json = to_json(&DiscoverReport { model: &model, residual_normality: &audit });
    let text = report::model_text(&model, &audit);
    let dot = model_dot(&model);
    ctx.write("model.json", &to_json(&model))?;
    ctx.write("discover.json", &json)?;
    ctx.write("discover.txt", &text)?;
    ctx.write("model.dot", &dot)?;
    Ok(ctx.outcome(pick(format, json, text, Some(dot))?))
}

fn cmd_bootstrap(ctx: &Context, format: Format, threads: Option<usize>) -> Result<Outcome, CliError> {
    let c = &ctx.config;
    let options = BootstrapOptions {
        count: c.bootstrap_count,
        master_seed: c.seed,
        lingam: c.lingam,
        keep_samples: false,
        threads,
    };
    let summary = bootstrap_fit(&ctx.matrix()?, &ctx.prior()?, &options)?;
    let pruned = prune(&summary, c.prune_threshold)?;
    let json = to_json(&pruned);
    let text = report::bootstrap_text(&pruned);
    let dot = bootstrap_dot(&pruned, c.prune_threshold);
    ctx.write("bootstrap.json", &json)?;
    ctx.write("bootstrap.txt", &text)?;
    ctx.write("bootstrap.dot", &dot)?;
    Ok(ctx.outcome(pick(format, json, text, Some(dot))?))
}

fn load_bootstrap(ctx: &Context) -> Result<BootstrapSummary, CliError> {
    ctx.read_json("bootstrap.json")?
        .ok_or_else(|| CliError::MissingArtifact(ctx.dir.join("bootstrap.json")))
}

fn cmd_effects(ctx: &Context, format: Format) -> Result<Outcome, CliError> {
    let r = EffectsReport::from_summary(&load_bootstrap(ctx)?);
    let (json, text) = (to_json(&r), report::effects_text(&r));
    ctx.write("effects.json", &json)?;
    ctx.write("effects.txt", &text)?;
    Ok(ctx.outcome(pick(format, json, text, None)?))
}

/// The pruned median graph of a bootstrap summary as a model, ready for refitting.
fn bootstrapped_model(s: &BootstrapSummary, standardized: bool) -> Result<CausalModel, CliError> {
    let causal_order = topological_order(&s.median_direct_effect)
        .ok_or_else(|| CliError::Numeric("bootstrapped median graph has a cycle".into()))?;
    Ok(CausalModel {
        variable_names: s.variable_names.clone(),
        causal_order,
        adjacency: s.median_direct_effect.clone(),
        residual_variances: vec![1.0; s.p()],
        standardized,
    })
}

fn cmd_fit(ctx: &Context, format: Format) -> Result<Outcome, CliError> {
    let m = ctx.matrix()?;
    let model = match ctx.read_json::<CausalModel>("model.json")? {
        Some(model) => model,
        None => discover(ctx)?.0,
    };
    let baseline = {
        let mut b = baseline_chi_square(&m)?;
        if let Some(d) = ctx.config.baseline_dof {
            b.dof = d;
        }
        b
    };
    let mut rows = vec![FitRow {
        label: "Causal model".into(),
        edges: model.edge_count(),
        variables: model.p(),
        indices: score_model(&model, &m, baseline)?,
    }];
    if let Some(s) = ctx.read_json::<BootstrapSummary>("bootstrap.json")? {
        let bm = bootstrapped_model(&s, model.standardized)?;
        rows.push(FitRow {
            label: "Bootstrapped causal model".into(),
            edges: bm.edge_count(),
            variables: bm.p(),
            indices: score_model(&bm, &m, baseline)?,
        });
    }
    let (json, text) = (to_json(&rows), report::fit_text(&rows));
    ctx.write("fit.json", &json)?;
    ctx.write("fit.txt", &text)?;
    Ok(ctx.outcome(pick(format, json, text, None)?))
}

fn cmd_fit_replay(values: &[f64], format: Format) -> Result<Outcome, CliError> {
    let [chi, dof, chi_b, dof_b, n] = values else {
        return Err(CliError::Config("--replay takes chi2,dof,chi2_baseline,dof_baseline,n".into()));
    };
    let int = |v: f64, what: &str| {
        if v.fract() == 0.0 && v.is_finite() {
            Ok(v as i64)
        } else {
            Err(CliError::Config(format!("{what} must be an integer, got {v}")))
        }
    };
    let n = int(*n, "n")?;
    if n < 0 {
        return Err(CliError::Config("n must be nonnegative".into()));
    }
    let indices = fit_indices(*chi, int(*dof, "dof")?, *chi_b, int(*dof_b, "baseline dof")?, n as usize, None)?;
    let rows = vec![FitRow { label: "Replay".into(), edges: 0, variables: 0, indices }];
    let stdout = pick(format, to_json(&rows), report::fit_text(&rows), None)?;
    Ok(Outcome { artifact_dir: None, stdout })
}

fn cmd_compare(ctx: &Context, format: Format) -> Result<Outcome, CliError> {
    let c = &ctx.config;
    let factors = c
        .factors()
        .iter()
        .map(|f| f.parse::<Measure>())
        .collect::<Result<Vec<_>, _>>()?;
    let results = compare_factors(&ctx.records, &factors, &c.conditions, c.compare)?;
    let json = to_json(&results);
    let text = format!("{}\n{}", report::friedman_text(&results), report::posthoc_text(&results));
    ctx.write("compare.json", &json)?;
    ctx.write("compare.txt", &text)?;
    Ok(ctx.outcome(pick(format, json, text, None)?))
}

fn cmd_export_dot(ctx: &Context, graph: Graph) -> Result<Outcome, CliError> {
    let (name, dot) = match graph {
        Graph::Model => {
            let model: CausalModel = ctx
                .read_json("model.json")?
                .ok_or_else(|| CliError::MissingArtifact(ctx.dir.join("model.json")))?;
            ("model.dot", model_dot(&model))
        }
        Graph::Bootstrap => {
            let s = load_bootstrap(ctx)?;
            let threshold = s.prune_threshold.unwrap_or(ctx.config.prune_threshold);
            ("bootstrap.dot", bootstrap_dot(&s, threshold))
        }
    };
    ctx.write(name, &dot)?;
    Ok(ctx.outcome(dot))
}

fn cmd_generate_fixture(output: &Path, seed: u64, truth: Option<&Path>) -> Result<Outcome, CliError> {
    let records = synth::fixture_trials(seed);
    let file = fs::File::create(output).map_err(|e| CliError::Io { path: output.to_path_buf(), source: e })?;
    write_trials(file, &records, &Schema::default())?;
    if let Some(path) = truth {
        fs::write(path, to_json(&synth::fixture_model())).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e })?;
    }
    Ok(Outcome { artifact_dir: None, stdout: format!("wrote {} trials to {}\n", records.len(), output.display()) })
}
