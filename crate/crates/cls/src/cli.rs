//! `cls` command line. Exit codes: 0 on success, 1 for usage and input
//! errors, 2 for numerical failures.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use cls_core::cls::{CrossFit, DomainFit, DEFAULT_FOLDS, DEFAULT_LAMBDA, DEFAULT_MC_SAMPLES};
use cls_core::enchead::{cls_enc_head, EncoderConfig};
use cls_core::models::ModelSpec;
use cls_core::synth::{sample_dataset, GeneratorSpec, Role, Setting, SettingKind};
use cls_core::transfer::TransferMethod;
use cls_core::zone::{baseline_from_fit, classify, thresholds, Baseline, Zone, ZoneThresholds, DEFAULT_GAMMA1, DEFAULT_GAMMA2};
use cls_core::{cls::ClsEstimate, Dataset, TaskKind};

use crate::csv_io::{load_csv, parse_task, save_csv};
use crate::error::{Error, Result};
use crate::harness::{
    oracle_for, render_table, replicate_seeds, run_sweep, run_zone_experiment, Metric, SweepConfig, SweepScheme, ZoneSweepConfig,
};

#[derive(Debug, Parser)]
#[command(name = "cls", version, about = "Cross-learning scores between a target and a source dataset")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write target.csv, source.csv and spec.json for a synthetic setting.
    Gen(GenArgs),
    /// Score a target/source pair of CSV files.
    Score(ScoreArgs),
    /// Score plus baseline thresholds and a transfer verdict.
    Zone(ZoneArgs),
    /// Population score of a synthetic setting.
    Oracle(OracleArgs),
    /// Similarity sweep over a grid, written as CSV (and optionally JSON).
    Sweep(SweepArgs),
    /// Zone verdicts against transfer-method outcomes along a grid.
    ZonesSweep(ZonesSweepArgs),
    /// Encoder-head score from pre-split target and source CSV files.
    Enchead(EncheadArgs),
    /// Print a CSV report as an aligned table.
    Report { input: PathBuf },
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long)]
    setting: SettingKind,
    /// Cosine, or mixing weight for the mixture setting.
    #[arg(long)]
    similarity: f64,
    #[arg(long, default_value_t = 200)]
    n: usize,
    /// Source rows; defaults to `--n`.
    #[arg(long)]
    n_source: Option<usize>,
    #[arg(long, default_value_t = 10)]
    p: usize,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum SchemeArg {
    Single,
    Avg,
    Ensemble,
}

#[derive(Debug, Args)]
struct ScoreArgs {
    #[arg(long)]
    target: PathBuf,
    #[arg(long)]
    source: PathBuf,
    /// binary, regression or multiclass:K
    #[arg(long, default_value = "binary")]
    task: String,
    /// Comma-separated model ids; defaults to the task's standard set.
    #[arg(long)]
    models: Option<String>,
    #[arg(long, value_enum, default_value_t = SchemeArg::Ensemble)]
    scheme: SchemeArg,
    #[arg(long, default_value_t = DEFAULT_LAMBDA)]
    lambda: f64,
    #[arg(long, default_value_t = DEFAULT_FOLDS)]
    folds: usize,
    /// Weight on the target-trained direction.
    #[arg(long, default_value_t = 0.5)]
    w: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct ZoneArgs {
    #[command(flatten)]
    score: ScoreArgs,
    #[arg(long, default_value_t = DEFAULT_GAMMA1)]
    gamma1: f64,
    #[arg(long, default_value_t = DEFAULT_GAMMA2)]
    gamma2: f64,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[arg(long)]
    setting: SettingKind,
    #[arg(long)]
    similarity: f64,
    #[arg(long, default_value_t = 10)]
    p: usize,
    /// Monte-Carlo draws per direction, for settings without a closed form.
    #[arg(long, default_value_t = DEFAULT_MC_SAMPLES)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct Output {
    /// CSV destination; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the JSON mirror here.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// JSON config; flags given on the command line override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    setting: Option<SettingKind>,
    /// `start:stop:step` or a comma-separated list.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    models: Option<String>,
    /// Comma-separated: single, unweighted-avg, weighted-avg, ensemble.
    #[arg(long)]
    schemes: Option<String>,
    /// Comma-separated: kl, w2, otdd; `none` for no metrics.
    #[arg(long)]
    metrics: Option<String>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    mc_samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct ZonesSweepArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    setting: Option<SettingKind>,
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long)]
    models: Option<String>,
    /// Comma-separated transfer methods: naive, tradaboost.
    #[arg(long)]
    methods: Option<String>,
    #[arg(long)]
    rounds: Option<usize>,
    #[arg(long)]
    train_per_class: Option<usize>,
    #[arg(long)]
    n_test: Option<usize>,
    #[arg(long)]
    n_source: Option<usize>,
    #[arg(long)]
    gamma1: Option<f64>,
    #[arg(long)]
    gamma2: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct EncheadArgs {
    #[arg(long)]
    target_train: PathBuf,
    #[arg(long)]
    target_test: PathBuf,
    #[arg(long)]
    source_train: PathBuf,
    #[arg(long)]
    source_test: PathBuf,
    #[arg(long, default_value = "binary")]
    task: String,
    /// Comma-separated hidden layer widths.
    #[arg(long, default_value = "32,16")]
    widths: String,
    #[arg(long, default_value_t = 100)]
    epochs: usize,
    #[arg(long, default_value_t = 0.01)]
    step: f64,
    #[arg(long, default_value_t = 32)]
    batch_size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let stdout = std::io::stdout();
    match execute(cli.command, &mut stdout.lock()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Like [`run`], but writes standard output to `out` and returns the error.
pub fn run_to<I, T>(args: I, out: &mut dyn Write) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| Error::usage(e.to_string()))?;
    execute(cli.command, out)
}

fn execute(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Gen(a) => gen(a, out),
        Command::Score(a) => {
            let (est, _, _) = score(&a)?;
            emit_json(out, &est)
        }
        Command::Zone(a) => zone(a, out),
        Command::Oracle(a) => {
            let setting = Setting::draw(a.setting, a.similarity, a.p, &mut cls_core::rng::stream(a.seed, 0))?;
            emit_json(out, &oracle_for(&setting, a.samples, a.seed)?)
        }
        Command::Sweep(a) => sweep(a, out),
        Command::ZonesSweep(a) => zones_sweep(a, out),
        Command::Enchead(a) => enchead(a, out),
        Command::Report { input } => {
            let text = std::fs::read_to_string(&input).map_err(|e| Error::io(&input, e))?;
            write_out(out, &render_table(&text)?)
        }
    }
}

fn write_out(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes()).map_err(|e| Error::io("<stdout>", e))
}

fn emit_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_out(out, &text)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn gen(a: GenArgs, out: &mut dyn Write) -> Result<()> {
    let seeds = replicate_seeds(a.seed, 0);
    let setting = Setting::draw(a.setting, a.similarity, a.p, &mut cls_core::rng::stream(seeds.replicate, 0))?;
    let target_spec = GeneratorSpec::new(setting.clone(), Role::Target, seeds.target_data);
    let source_spec = GeneratorSpec::new(setting, Role::Source, seeds.source_data);
    let target = sample_dataset(&target_spec, a.n, target_spec.seed)?;
    let source = sample_dataset(&source_spec, a.n_source.unwrap_or(a.n), source_spec.seed)?;
    std::fs::create_dir_all(&a.out_dir).map_err(|e| Error::io(&a.out_dir, e))?;
    save_csv(&target, a.out_dir.join("target.csv"))?;
    save_csv(&source, a.out_dir.join("source.csv"))?;
    let spec = serde_json::json!({ "target": target_spec, "source": source_spec });
    write_file(&a.out_dir.join("spec.json"), &serde_json::to_string_pretty(&spec)?)?;
    writeln!(out, "wrote {} and {} rows to {}", target.n(), source.n(), a.out_dir.display()).map_err(|e| Error::io("<stdout>", e))
}

fn models_for(list: Option<&str>, task: TaskKind) -> Result<Vec<ModelSpec>> {
    match list {
        Some(l) => Ok(ModelSpec::parse_list(l)?),
        None => Ok(ModelSpec::default_set(task)),
    }
}

/// Estimate plus the target fit and data for the baseline.
fn score(a: &ScoreArgs) -> Result<(ClsEstimate, DomainFit, Dataset)> {
    let task = parse_task(&a.task)?;
    let target = load_csv(&a.target, task)?;
    let source = load_csv(&a.source, task)?;
    let mut models = models_for(a.models.as_deref(), task)?;
    if a.scheme == SchemeArg::Single {
        if a.models.is_some() && models.len() != 1 {
            return Err(Error::usage("--scheme single takes exactly one model"));
        }
        models.truncate(1);
    }
    let loss = task.default_loss();
    let tf = DomainFit::new(&models, &target, Some((a.folds, a.seed)), loss)?;
    let sf = DomainFit::new(&models, &source, Some((a.folds, a.seed ^ crate::harness::SOURCE_FOLD_MIX)), loss)?;
    let mut cross = CrossFit::new(&tf, &target, &sf, &source)?;
    cross.seed = Some(a.seed);
    let est = match a.scheme {
        SchemeArg::Single => cross.single(0)?,
        SchemeArg::Avg => cross.weighted_avg(a.lambda)?,
        SchemeArg::Ensemble => cross.ensemble(a.lambda)?,
    };
    let est = est.with_weight(a.w)?;
    Ok((est, tf, target))
}

#[derive(Serialize)]
struct ZoneVerdict {
    estimate: ClsEstimate,
    baseline: Baseline,
    thresholds: ZoneThresholds,
    zone: Zone,
}

fn zone(a: ZoneArgs, out: &mut dyn Write) -> Result<()> {
    let (estimate, fit, target) = score(&a.score)?;
    let lambda = if a.score.scheme == SchemeArg::Single { 0.0 } else { a.score.lambda };
    let baseline = baseline_from_fit(&fit, &target, lambda, a.score.scheme == SchemeArg::Ensemble)?;
    let t = thresholds(baseline.e0, baseline.se, a.gamma1, a.gamma2)?;
    let zone = classify(estimate.score, &t);
    emit_json(out, &ZoneVerdict { estimate, baseline, thresholds: t, zone })
}

/// `start:stop:step` (inclusive, rounded to 10 decimals) or `a,b,c`.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::usage(format!("bad grid '{s}'"));
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let v: Vec<f64> = parts.iter().map(|p| p.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<_>>()?;
        let (start, stop, step) = (v[0], v[1], v[2]);
        if !(step > 0.0) || stop < start {
            return Err(bad());
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize;
        return Ok((0..=count).map(|i| ((start + i as f64 * step) * 1e10).round() / 1e10).collect());
    }
    s.split(',').map(|p| p.trim().parse::<f64>().map_err(|_| bad())).collect()
}

fn parse_each<T: std::str::FromStr<Err = E>, E: Into<Error>>(s: &str) -> Result<Vec<T>> {
    s.split(',').filter(|p| !p.trim().is_empty()).map(|p| p.trim().parse::<T>().map_err(Into::into)).collect()
}

fn read_config<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

fn finish_output(output: &Output, csv: &str, json: impl FnOnce() -> Result<String>, out: &mut dyn Write) -> Result<()> {
    if let Some(path) = &output.json {
        write_file(path, &json()?)?;
    }
    match &output.out {
        Some(path) => write_file(path, csv),
        None => write_out(out, csv),
    }
}

fn sweep(a: SweepArgs, out: &mut dyn Write) -> Result<()> {
    let mut c: SweepConfig = match (&a.config, a.setting) {
        (Some(path), _) => read_config(path)?,
        (None, Some(s)) => SweepConfig::new(s),
        (None, None) => return Err(Error::usage("sweep needs --setting or --config")),
    };
    if let (Some(s), Some(_)) = (a.setting, &a.config) {
        c.setting = s;
    }
    if let Some(g) = &a.grid {
        c.grid = parse_grid(g)?;
    }
    c.replicates = a.replicates.unwrap_or(c.replicates);
    c.n = a.n.unwrap_or(c.n);
    c.p = a.p.unwrap_or(c.p);
    if let Some(m) = &a.models {
        c.models = ModelSpec::parse_list(m)?;
    }
    if let Some(s) = &a.schemes {
        c.schemes = parse_each::<SweepScheme, Error>(s)?;
    }
    if let Some(m) = &a.metrics {
        c.metrics = if m.trim() == "none" { Vec::new() } else { parse_each::<Metric, Error>(m)? };
    }
    c.lambda = a.lambda.unwrap_or(c.lambda);
    c.folds = a.folds.unwrap_or(c.folds);
    c.mc_samples = a.mc_samples.unwrap_or(c.mc_samples);
    c.seed = a.seed.unwrap_or(c.seed);
    let report = run_sweep(&c)?;
    finish_output(&a.output, &report.to_csv(), || report.to_json(), out)
}

fn zones_sweep(a: ZonesSweepArgs, out: &mut dyn Write) -> Result<()> {
    let mut c: ZoneSweepConfig = match (&a.config, a.setting) {
        (Some(path), _) => read_config(path)?,
        (None, Some(s)) => ZoneSweepConfig::new(s),
        (None, None) => return Err(Error::usage("zones-sweep needs --setting or --config")),
    };
    if let (Some(s), Some(_)) = (a.setting, &a.config) {
        c.setting = s;
    }
    if let Some(g) = &a.grid {
        c.grid = parse_grid(g)?;
    }
    c.replicates = a.replicates.unwrap_or(c.replicates);
    if let Some(m) = &a.models {
        c.models = ModelSpec::parse_list(m)?;
    }
    if let Some(m) = &a.methods {
        c.methods = parse_each::<TransferMethod, cls_core::Error>(m)?;
    }
    c.rounds = a.rounds.unwrap_or(c.rounds);
    c.train_per_class = a.train_per_class.unwrap_or(c.train_per_class);
    c.n_test = a.n_test.unwrap_or(c.n_test);
    c.n_source = a.n_source.unwrap_or(c.n_source);
    c.gamma1 = a.gamma1.unwrap_or(c.gamma1);
    c.gamma2 = a.gamma2.unwrap_or(c.gamma2);
    c.seed = a.seed.unwrap_or(c.seed);
    let report = run_zone_experiment(&c)?;
    finish_output(&a.output, &report.to_csv(), || report.to_json(), out)
}

fn enchead(a: EncheadArgs, out: &mut dyn Write) -> Result<()> {
    let task = parse_task(&a.task)?;
    let widths = parse_each::<usize, std::num::ParseIntError>(&a.widths)?;
    let config = EncoderConfig { widths, epochs: a.epochs, learning_rate: a.step, batch_size: a.batch_size, seed: a.seed };
    let load = |p: &PathBuf| load_csv(p, task);
    let result = cls_enc_head(&config, &load(&a.target_train)?, &load(&a.target_test)?, &load(&a.source_train)?, &load(&a.source_test)?)?;
    emit_json(out, &result)
}

impl From<std::num::ParseIntError> for Error {
    fn from(e: std::num::ParseIntError) -> Self {
        Error::usage(format!("bad integer: {e}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        let g = parse_grid("-1:1:0.1").unwrap();
        assert_eq!(g.len(), 21);
        assert_eq!((g[0], g[10], g[20]), (-1.0, 0.0, 1.0));
        assert_eq!(g[3], -0.7);
        assert_eq!(parse_grid("0, 0.5").unwrap(), vec![0.0, 0.5]);
        assert!(parse_grid("1:0:0.1").is_err());
        assert!(parse_grid("a,b").is_err());
    }

    #[test]
    fn clap_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
