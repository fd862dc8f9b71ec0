//! Command-line driver: fit, rank, curve and report.
//!
//! Settings come from an optional `key=value` file and are overridden by
//! flags. Every output is a pure function of the resolved [`RunConfig`], so
//! repeated runs produce byte-identical files.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::criteria::{
    evaluate_all, CriteriaMatrix, CriterionError, CriterionId, DEFAULT_SELECTION,
};
use crate::dataset::{DatasetError, FailureDataset};
use crate::fit::{fit_all, FitError, FitRecord, FitSpec, FittedModel};
use crate::models::{ModelError, ModelId, ParamVector};
use crate::par::Execution;
use crate::ranking::{rank_models, DirectionRegistry, PrrMode, RankingResult};
use crate::ssa::SsaConfig;

pub const DEFAULT_GRID_POINTS: usize = 200;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("{0}")]
    Data(String),
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error(transparent)]
    Criterion(#[from] CriterionError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    /// 1 usage/config, 2 data validation, 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 1,
            CliError::Dataset(_) | CliError::Data(_) => 2,
            CliError::Model(ModelError::UnknownModel { .. }) => 1,
            CliError::Criterion(CriterionError::Table { .. } | CriterionError::Unknown(_)) => 2,
            CliError::Criterion(CriterionError::DatasetMismatch { .. }) => 2,
            CliError::Fit(_) | CliError::Criterion(_) | CliError::Model(_) => 3,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_owned(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DirectionPreset {
    Uniform,
    Semantic,
}

/// Fully resolved run settings.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub dataset: Option<PathBuf>,
    pub models: Vec<ModelId>,
    pub criteria: Vec<CriterionId>,
    pub ssa: SsaConfig,
    pub directions: DirectionPreset,
    /// `None` keeps the preset's PRR handling.
    pub prr_direction: Option<PrrMode>,
    pub output: PathBuf,
    /// Hold Z-T-P's `p` at 1.
    pub pin_ztp_p: bool,
    pub grid_points: usize,
    pub execution: Execution,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dataset: None,
            models: ModelId::ALL.to_vec(),
            criteria: DEFAULT_SELECTION.to_vec(),
            ssa: SsaConfig::default(),
            directions: DirectionPreset::Uniform,
            prr_direction: None,
            output: PathBuf::from("out"),
            pin_ztp_p: false,
            grid_points: DEFAULT_GRID_POINTS,
            execution: Execution::default(),
        }
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| CliError::Config(format!("{key}: cannot parse `{value}`: {e}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, CliError> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(CliError::Config(format!(
            "{key}: expected true or false, got `{value}`"
        ))),
    }
}

pub fn parse_models(list: &str) -> Result<Vec<ModelId>, CliError> {
    if list.trim().eq_ignore_ascii_case("all") {
        return Ok(ModelId::ALL.to_vec());
    }
    let mut out = Vec::new();
    for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let m: ModelId = name.parse()?;
        if !out.contains(&m) {
            out.push(m);
        }
    }
    if out.is_empty() {
        return Err(CliError::Config("model selection is empty".into()));
    }
    Ok(out)
}

pub fn parse_criteria(list: &str) -> Result<Vec<CriterionId>, CliError> {
    match list.trim().to_ascii_lowercase().as_str() {
        "default" => return Ok(DEFAULT_SELECTION.to_vec()),
        "all" => return Ok(CriterionId::ALL.to_vec()),
        _ => {}
    }
    let mut out = Vec::new();
    for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let c: CriterionId = name
            .parse()
            .map_err(|_| CliError::Config(format!("unknown criterion `{name}`")))?;
        if !out.contains(&c) {
            out.push(c);
        }
    }
    if out.is_empty() {
        return Err(CliError::Config("criteria selection is empty".into()));
    }
    Ok(out)
}

fn parse_preset(value: &str) -> Result<DirectionPreset, CliError> {
    match value.trim().to_ascii_lowercase().as_str() {
        "uniform" => Ok(DirectionPreset::Uniform),
        "semantic" => Ok(DirectionPreset::Semantic),
        other => Err(CliError::Config(format!(
            "directions must be `uniform` or `semantic`, got `{other}`"
        ))),
    }
}

fn parse_execution(value: &str) -> Result<Execution, CliError> {
    match value.trim().to_ascii_lowercase().as_str() {
        "parallel" => Ok(Execution::Parallel),
        "sequential" => Ok(Execution::Sequential),
        other => Err(CliError::Config(format!(
            "execution must be `parallel` or `sequential`, got `{other}`"
        ))),
    }
}

impl RunConfig {
    /// Applies one `key=value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let value = value.trim();
        match key.trim() {
            "dataset" => self.dataset = Some(PathBuf::from(value)),
            "models" => self.models = parse_models(value)?,
            "criteria" => self.criteria = parse_criteria(value)?,
            "pop" => self.ssa.pop = parse_value(key, value)?,
            "r_a" | "attenuation_rate" => self.ssa.attenuation_rate = parse_value(key, value)?,
            "p_c" | "mask_change" => self.ssa.mask_change = parse_value(key, value)?,
            "p_m" | "mask_one" => self.ssa.mask_one = parse_value(key, value)?,
            "max_iters" | "iterations" => self.ssa.max_iters = parse_value(key, value)?,
            "seed" => self.ssa.seed = parse_value(key, value)?,
            "intensity_constant" => self.ssa.intensity_constant = parse_value(key, value)?,
            "stall_window" => {
                self.ssa.stall_window = match value {
                    "" | "none" => None,
                    v => Some(parse_value(key, v)?),
                }
            }
            "directions" => self.directions = parse_preset(value)?,
            "prr_direction" => self.prr_direction = Some(value.parse().map_err(CliError::Config)?),
            "output" | "out" => self.output = PathBuf::from(value),
            "pin_ztp_p" => self.pin_ztp_p = parse_bool(key, value)?,
            "grid_points" => self.grid_points = parse_value(key, value)?,
            "execution" => self.execution = parse_execution(value)?,
            other => return Err(CliError::Config(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    /// Applies a `key=value` file. Blank lines and `#` comments are ignored.
    pub fn apply_text(&mut self, text: &str) -> Result<(), CliError> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("config line {}: expected key=value", n + 1))
            })?;
            self.set(key, value)
                .map_err(|e| CliError::Config(format!("config line {}: {e}", n + 1)))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.ssa
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        if self.models.is_empty() {
            return Err(CliError::Config("model selection is empty".into()));
        }
        if self.criteria.is_empty() {
            return Err(CliError::Config("criteria selection is empty".into()));
        }
        Ok(())
    }

    pub fn registry(&self) -> DirectionRegistry {
        let base = match self.directions {
            DirectionPreset::Uniform => DirectionRegistry::uniform(),
            DirectionPreset::Semantic => DirectionRegistry::semantic(),
        };
        match self.prr_direction {
            Some(p) => base.with_prr(p),
            None => base,
        }
    }

    pub fn fit_spec(&self) -> FitSpec {
        FitSpec {
            config: SsaConfig {
                execution: Execution::Sequential,
                ..self.ssa.clone()
            },
            bounds: None,
            fixed: Vec::new(),
        }
    }

    fn fixed_for(&self, model: ModelId) -> Vec<(usize, f64)> {
        if self.pin_ztp_p && model == ModelId::ZTP {
            let p = ModelId::ZTP
                .param_names()
                .iter()
                .position(|&n| n == "p")
                .expect("Z-T-P has a p parameter");
            vec![(p, 1.0)]
        } else {
            Vec::new()
        }
    }

    pub fn load_dataset(&self) -> Result<FailureDataset, CliError> {
        let path = self.dataset.as_ref().ok_or_else(|| {
            CliError::Config("no dataset given (use --dataset or dataset=)".into())
        })?;
        if !path.exists() {
            return Err(CliError::Data(format!(
                "dataset {} does not exist",
                path.display()
            )));
        }
        Ok(FailureDataset::from_path(path)?)
    }
}

/// Fit SRGMs with the Social Spider Algorithm and rank them.
#[derive(Debug, Parser)]
#[command(name = "srgm", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate parameters; writes params.csv and fit_<model>.json.
    Fit(CommonArgs),
    /// Compute criteria and rank; writes criteria.csv and ranking.csv.
    Rank(RankArgs),
    /// Emit actual and estimated curve data for one model.
    Curve(CurveArgs),
    /// Fit, rank and write curves for every selected model.
    Report(CommonArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// key=value settings file; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Failure data CSV with header `t,cumulative_faults`.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Comma-separated model names, or `all`.
    #[arg(long)]
    pub models: Option<String>,
    /// Comma-separated criteria, `default` or `all`.
    #[arg(long)]
    pub criteria: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub pop: Option<usize>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub r_a: Option<f64>,
    #[arg(long)]
    pub p_c: Option<f64>,
    #[arg(long)]
    pub p_m: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub intensity_constant: Option<f64>,
    #[arg(long)]
    pub stall_window: Option<usize>,
    /// `uniform` (default) or `semantic` criterion directions.
    #[arg(long)]
    pub directions: Option<String>,
    /// `raw` or `absolute` PRR in ranking.
    #[arg(long)]
    pub prr_direction: Option<String>,
    /// Output directory.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Hold Z-T-P's p at 1.
    #[arg(long)]
    pub pin_ztp_p: bool,
    #[arg(long)]
    pub grid_points: Option<usize>,
    /// `parallel` or `sequential`.
    #[arg(long)]
    pub execution: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct RankArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Rank a precomputed criteria table instead of fitted models.
    #[arg(long)]
    pub criteria_csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CurveArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub model: String,
}

impl CommonArgs {
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path).map_err(io_err(path))?;
            cfg.apply_text(&text)?;
        }
        if let Some(v) = &self.dataset {
            cfg.dataset = Some(v.clone());
        }
        if let Some(v) = &self.models {
            cfg.models = parse_models(v)?;
        }
        if let Some(v) = &self.criteria {
            cfg.criteria = parse_criteria(v)?;
        }
        if let Some(v) = self.seed {
            cfg.ssa.seed = v;
        }
        if let Some(v) = self.pop {
            cfg.ssa.pop = v;
        }
        if let Some(v) = self.max_iters {
            cfg.ssa.max_iters = v;
        }
        if let Some(v) = self.r_a {
            cfg.ssa.attenuation_rate = v;
        }
        if let Some(v) = self.p_c {
            cfg.ssa.mask_change = v;
        }
        if let Some(v) = self.p_m {
            cfg.ssa.mask_one = v;
        }
        if let Some(v) = self.intensity_constant {
            cfg.ssa.intensity_constant = v;
        }
        if let Some(v) = self.stall_window {
            cfg.ssa.stall_window = Some(v);
        }
        if let Some(v) = &self.directions {
            cfg.directions = parse_preset(v)?;
        }
        if let Some(v) = &self.prr_direction {
            cfg.prr_direction = Some(v.parse().map_err(CliError::Config)?);
        }
        if let Some(v) = &self.out {
            cfg.output = v.clone();
        }
        if self.pin_ztp_p {
            cfg.pin_ztp_p = true;
        }
        if let Some(v) = self.grid_points {
            cfg.grid_points = v;
        }
        if let Some(v) = &self.execution {
            cfg.execution = parse_execution(v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(io_err(&path))?;
    Ok(path)
}

pub fn fit_file_name(model: ModelId) -> String {
    format!("fit_{}.json", model.cli_name())
}

pub fn curve_file_name(model: ModelId) -> String {
    format!("curve_{}.csv", model.cli_name())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

/// Wide parameter table: one row per model, one column per distinct parameter
/// name (in first-seen order), blank where a model lacks the parameter.
pub fn params_csv(fits: &[FittedModel]) -> String {
    let mut columns: Vec<&str> = Vec::new();
    for f in fits {
        for name in f.model.param_names() {
            if !columns.contains(&name) {
                columns.push(name);
            }
        }
    }
    let mut out = String::from("model");
    for c in &columns {
        out.push(',');
        out.push_str(c);
    }
    out.push_str(",objective,underdetermined\n");
    for f in fits {
        out.push_str(&csv_field(f.model.short_name()));
        for c in &columns {
            out.push(',');
            if let Some(v) = f.params.get(c) {
                let _ = write!(out, "{v}");
            }
        }
        let _ = writeln!(out, ",{},{}", f.objective_value, f.underdetermined);
    }
    out
}

/// Curve rows at observation times plus `grid_points` evenly spaced times on
/// `[0, t_k]`; grid rows leave `actual` empty. Rows are sorted by time and a
/// grid time equal to an observation time is dropped.
pub fn curve_csv(
    dataset: &FailureDataset,
    params: &ParamVector,
    grid_points: usize,
) -> Result<String, CliError> {
    let mut rows: Vec<(f64, Option<f64>)> =
        dataset.points().iter().map(|p| (p.t, Some(p.m))).collect();
    let observed: BTreeSet<u64> = rows.iter().map(|r| r.0.to_bits()).collect();
    let t_end = dataset.last_time();
    if grid_points > 0 {
        let step = if grid_points > 1 {
            t_end / (grid_points - 1) as f64
        } else {
            0.0
        };
        for i in 0..grid_points {
            let t = if i + 1 == grid_points {
                t_end
            } else {
                step * i as f64
            };
            if !observed.contains(&t.to_bits()) {
                rows.push((t, None));
            }
        }
    }
    rows.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.is_some().cmp(&a.1.is_some())));
    rows.dedup_by(|b, a| a.0 == b.0 && b.1.is_none());
    let mut out = String::from("t,actual,estimated\n");
    for (t, actual) in rows {
        let est = params.mean_value(t)?;
        match actual {
            Some(a) => writeln!(out, "{t},{a},{est}"),
            None => writeln!(out, "{t},,{est}"),
        }
        .expect("writing to a String");
    }
    Ok(out)
}

/// Runs all fits; the first failure aborts.
pub fn run_fits(cfg: &RunConfig, dataset: &FailureDataset) -> Result<Vec<FittedModel>, CliError> {
    let spec = cfg.fit_spec();
    let results = fit_all(
        dataset,
        &cfg.models,
        &spec,
        |m| cfg.fixed_for(m),
        cfg.execution,
    );
    results
        .into_iter()
        .map(|r| r.map_err(CliError::from))
        .collect()
}

pub fn cmd_fit(cfg: &RunConfig) -> Result<Vec<FittedModel>, CliError> {
    let dataset = cfg.load_dataset()?;
    let fits = run_fits(cfg, &dataset)?;
    write_fit_outputs(cfg, &fits)?;
    Ok(fits)
}

fn write_fit_outputs(cfg: &RunConfig, fits: &[FittedModel]) -> Result<(), CliError> {
    write_file(&cfg.output, "params.csv", &params_csv(fits))?;
    for f in fits {
        let mut json = f.to_json();
        json.push('\n');
        write_file(&cfg.output, &fit_file_name(f.model), &json)?;
    }
    Ok(())
}

fn load_fit(cfg: &RunConfig, model: ModelId) -> Result<FitRecord, CliError> {
    let path = cfg.output.join(fit_file_name(model));
    let text = fs::read_to_string(&path).map_err(|_| {
        CliError::Config(format!(
            "no fit for {} at {}; run `srgm fit` with the same --out first",
            model.short_name(),
            path.display()
        ))
    })?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Data(format!("{}: malformed fit record: {e}", path.display())))
}

fn fitted_from_record(rec: FitRecord) -> Result<FittedModel, CliError> {
    let params = rec.param_vector()?;
    Ok(FittedModel {
        model: rec.model_id,
        params,
        objective_value: rec.objective_value,
        config_used: rec.config,
        dataset_name: rec.dataset_name,
        underdetermined: rec.underdetermined,
        iterations: rec.iterations,
        history: Vec::new(),
        initial_best: f64::NAN,
    })
}

fn write_rank_outputs(cfg: &RunConfig, matrix: &CriteriaMatrix) -> Result<RankingResult, CliError> {
    let ranking = rank_models(matrix, &cfg.registry());
    write_file(&cfg.output, "criteria.csv", &matrix.to_csv())?;
    write_file(&cfg.output, "ranking.csv", &ranking.to_csv())?;
    Ok(ranking)
}

/// Ranks a precomputed criteria table; never runs the optimizer.
pub fn cmd_rank_replay(cfg: &RunConfig, criteria_csv: &Path) -> Result<RankingResult, CliError> {
    let file = fs::File::open(criteria_csv).map_err(io_err(criteria_csv))?;
    let matrix = CriteriaMatrix::from_csv(file)?;
    write_rank_outputs(cfg, &matrix)
}

/// Ranks previously fitted models read back from the output directory.
pub fn cmd_rank(cfg: &RunConfig) -> Result<RankingResult, CliError> {
    let dataset = cfg.load_dataset()?;
    let fits = cfg
        .models
        .iter()
        .map(|&m| load_fit(cfg, m).and_then(fitted_from_record))
        .collect::<Result<Vec<_>, _>>()?;
    let matrix = evaluate_all(&dataset, &fits, &cfg.criteria)?;
    write_rank_outputs(cfg, &matrix)
}

pub fn cmd_curve(cfg: &RunConfig, model: &str) -> Result<PathBuf, CliError> {
    let model: ModelId = model.parse()?;
    let dataset = cfg.load_dataset()?;
    let fit = fitted_from_record(load_fit(cfg, model)?)?;
    let csv = curve_csv(&dataset, &fit.params, cfg.grid_points)?;
    write_file(&cfg.output, &curve_file_name(model), &csv)
}

/// Fit, rank and curves in one pass.
pub fn cmd_report(cfg: &RunConfig) -> Result<RankingResult, CliError> {
    let dataset = cfg.load_dataset()?;
    let fits = run_fits(cfg, &dataset)?;
    write_fit_outputs(cfg, &fits)?;
    let matrix = evaluate_all(&dataset, &fits, &cfg.criteria)?;
    let ranking = write_rank_outputs(cfg, &matrix)?;
    for f in &fits {
        let csv = curve_csv(&dataset, &f.params, cfg.grid_points)?;
        write_file(&cfg.output, &curve_file_name(f.model), &csv)?;
    }
    Ok(ranking)
}

fn print_ranking(r: &RankingResult) {
    println!("{:<4} {:<10} {:>14}", "rank", "model", "permanent");
    for name in r.ordered() {
        let i = r
            .models
            .iter()
            .position(|m| m == name)
            .expect("ranked model");
        println!(
            "{:<4} {:<10} {:>14.4}",
            r.rank[i], name, r.permanent_value[i]
        );
    }
}

/// Dispatches a parsed command line.
pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Fit(args) => {
            let cfg = args.resolve()?;
            let fits = cmd_fit(&cfg)?;
            for f in &fits {
                println!("{:<10} SSE {}", f.model.short_name(), f.objective_value);
            }
        }
        Command::Rank(args) => {
            let cfg = args.common.resolve()?;
            let r = match &args.criteria_csv {
                Some(path) => cmd_rank_replay(&cfg, path)?,
                None => cmd_rank(&cfg)?,
            };
            print_ranking(&r);
        }
        Command::Curve(args) => {
            let cfg = args.common.resolve()?;
            let path = cmd_curve(&cfg, &args.model)?;
            println!("{}", path.display());
        }
        Command::Report(args) => {
            let cfg = args.resolve()?;
            print_ranking(&cmd_report(&cfg)?);
        }
    }
    Ok(())
}
