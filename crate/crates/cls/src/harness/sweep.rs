use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use cls_core::cls::{CrossFit, DomainFit, DEFAULT_FOLDS, DEFAULT_LAMBDA};
use cls_core::metrics::{kl_gaussian, otdd_gaussian, w2_gaussian};
use cls_core::models::ModelSpec;
use cls_core::synth::{sample_dataset, GeneratorSpec, Role, Setting, SettingKind};
use cls_core::Dataset;

use super::report::{Report, Row};
use super::{oracle_for, replicate_seeds, ReplicateSeeds};
use crate::error::{Error, Result};

/// Monte-Carlo samples per direction for oracles inside sweeps.
pub const SWEEP_MC_SAMPLES: usize = 20_000;
/// Largest share of failed replicates tolerated at one grid point.
pub const MAX_FAILURE_RATE: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepScheme {
    /// One column per model.
    Single,
    UnweightedAvg,
    WeightedAvg,
    Ensemble,
}

impl SweepScheme {
    pub const ALL: [SweepScheme; 4] = [SweepScheme::Single, SweepScheme::UnweightedAvg, SweepScheme::WeightedAvg, SweepScheme::Ensemble];

    pub fn id(self) -> &'static str {
        match self {
            SweepScheme::Single => "single",
            SweepScheme::UnweightedAvg => "unweighted-avg",
            SweepScheme::WeightedAvg => "weighted-avg",
            SweepScheme::Ensemble => "ensemble",
        }
    }
}

impl std::str::FromStr for SweepScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|k| k.id() == s.trim()).ok_or_else(|| Error::usage(format!("unknown scheme '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Kl,
    W2,
    Otdd,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Kl, Metric::W2, Metric::Otdd];

    pub fn id(self) -> &'static str {
        match self {
            Metric::Kl => "kl",
            Metric::W2 => "w2",
            Metric::Otdd => "otdd",
        }
    }

    pub fn compute(self, target: &Dataset, source: &Dataset) -> cls_core::Result<f64> {
        match self {
            Metric::Kl => kl_gaussian(target, source),
            Metric::W2 => w2_gaussian(target, source),
            Metric::Otdd => otdd_gaussian(target, source),
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|k| k.id() == s.trim()).ok_or_else(|| Error::usage(format!("unknown metric '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    pub setting: SettingKind,
    pub grid: Vec<f64>,
    pub replicates: usize,
    /// Rows in each of the target and source datasets.
    pub n: usize,
    pub p: usize,
    pub models: Vec<ModelSpec>,
    pub schemes: Vec<SweepScheme>,
    pub metrics: Vec<Metric>,
    pub lambda: f64,
    pub folds: usize,
    pub mc_samples: usize,
    pub seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig::new(SettingKind::Probit)
    }
}

impl SweepConfig {
    /// Defaults for `setting`: its standard grid, 50 replicates of 200 rows,
    /// p = 10, the task's default models, every scheme and every applicable metric.
    pub fn new(setting: SettingKind) -> Self {
        let task = setting.task();
        let metrics = if task.is_classification() { Metric::ALL.to_vec() } else { vec![Metric::Kl, Metric::W2] };
        SweepConfig {
            setting,
            grid: setting.default_grid(),
            replicates: 50,
            n: 200,
            p: 10,
            models: ModelSpec::default_set(task),
            schemes: SweepScheme::ALL.to_vec(),
            metrics,
            lambda: DEFAULT_LAMBDA,
            folds: DEFAULT_FOLDS,
            mc_samples: SWEEP_MC_SAMPLES,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::usage("grid is empty"));
        }
        if self.grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::usage("grid must be strictly increasing"));
        }
        if self.replicates == 0 {
            return Err(Error::usage("need at least one replicate"));
        }
        if self.models.is_empty() {
            return Err(Error::usage("model list is empty"));
        }
        if self.schemes.is_empty() && self.metrics.is_empty() {
            return Err(Error::usage("nothing to compute: no schemes and no metrics"));
        }
        let task = self.setting.task();
        for m in &self.models {
            m.validate()?;
            if !m.algorithm.supports(task) {
                return Err(cls_core::Error::IncompatibleTask { algorithm: m.algorithm.to_string(), task: task.to_string() }.into());
            }
        }
        if self.metrics.contains(&Metric::Otdd) && !task.is_classification() {
            return Err(Error::usage("otdd needs a classification setting"));
        }
        for c in &self.grid {
            Setting::draw(self.setting, *c, self.p, &mut cls_core::rng::seeded(0))?;
        }
        Ok(())
    }

    /// Report columns after the similarity column, in order.
    pub fn columns(&self) -> Vec<String> {
        let mut cols = vec!["oracle".to_string()];
        for s in &self.schemes {
            match s {
                SweepScheme::Single => cols.extend(self.models.iter().map(|m| m.algorithm.id().to_string())),
                other => cols.push(other.id().to_string()),
            }
        }
        cols.extend(self.metrics.iter().map(|m| m.id().to_string()));
        cols
    }

    /// Columns compared with the oracle in the `diff` footer.
    pub fn estimator_columns(&self) -> Vec<String> {
        let metrics: Vec<&str> = self.metrics.iter().map(|m| m.id()).collect();
        self.columns().into_iter().skip(1).filter(|c| !metrics.contains(&c.as_str())).collect()
    }
}

/// Estimates for one replicate at one similarity value, in column order.
fn grid_point(
    config: &SweepConfig,
    setting: &Setting,
    target: &Dataset,
    target_fit: Option<&DomainFit>,
    seeds: &ReplicateSeeds,
) -> Result<Vec<f64>> {
    let source_spec = GeneratorSpec::new(setting.clone(), Role::Source, seeds.source_data);
    let source = sample_dataset(&source_spec, config.n, seeds.source_data)?;
    let mut values = Vec::with_capacity(config.columns().len());
    values.push(oracle_for(setting, config.mc_samples, seeds.mc)?.score);
    if let Some(target_fit) = target_fit {
        let loss = target.task().default_loss();
        let source_fit = DomainFit::new(&config.models, &source, Some((config.folds, seeds.source_folds)), loss)?;
        let cross = CrossFit::new(target_fit, target, &source_fit, &source)?;
        for s in &config.schemes {
            match s {
                SweepScheme::Single => {
                    for i in 0..config.models.len() {
                        values.push(cross.single(i)?.score);
                    }
                }
                SweepScheme::UnweightedAvg => values.push(cross.weighted_avg(0.0)?.score),
                SweepScheme::WeightedAvg => values.push(cross.weighted_avg(config.lambda)?.score),
                SweepScheme::Ensemble => values.push(cross.ensemble(config.lambda)?.score),
            }
        }
    }
    for m in &config.metrics {
        values.push(m.compute(target, &source)?);
    }
    Ok(values)
}

/// All grid points of one replicate. The target data and its fits do not
/// depend on the similarity value, so they are shared across the grid.
fn replicate(config: &SweepConfig, r: usize) -> Vec<Result<Vec<f64>, String>> {
    let seeds = replicate_seeds(config.seed, r);
    let prepared = (|| -> Result<_> {
        let base = Setting::draw(config.setting, config.grid[0], config.p, &mut cls_core::rng::stream(seeds.replicate, 0))?;
        let target = sample_dataset(&GeneratorSpec::new(base.clone(), Role::Target, seeds.target_data), config.n, seeds.target_data)?;
        let fit = if config.schemes.is_empty() {
            None
        } else {
            let loss = target.task().default_loss();
            Some(DomainFit::new(&config.models, &target, Some((config.folds, seeds.target_folds)), loss)?)
        };
        Ok((base, target, fit))
    })();
    match prepared {
        Err(e) => config.grid.iter().map(|_| Err(e.to_string())).collect(),
        Ok((base, target, fit)) => config
            .grid
            .iter()
            .map(|c| grid_point(config, &base.with_similarity(*c), &target, fit.as_ref(), &seeds).map_err(|e| e.to_string()))
            .collect(),
    }
}

/// Runs every replicate at every grid point and averages the columns.
/// Failed replicates are left out of the averages and counted; more than
/// 20% failures at any grid point is an error.
pub fn run_sweep(config: &SweepConfig) -> Result<Report> {
    config.validate()?;
    let results: Vec<Vec<Result<Vec<f64>, String>>> = (0..config.replicates).into_par_iter().map(|r| replicate(config, r)).collect();
    let columns = config.columns();
    let mut rows = Vec::with_capacity(config.grid.len());
    for (g, c) in config.grid.iter().enumerate() {
        let mut sums = vec![0.0; columns.len()];
        let mut ok = 0;
        let mut failures = Vec::new();
        for rep in &results {
            match &rep[g] {
                Ok(v) => {
                    ok += 1;
                    for (s, x) in sums.iter_mut().zip(v) {
                        *s += x;
                    }
                }
                Err(e) => failures.push(e.clone()),
            }
        }
        if failures.len() as f64 > MAX_FAILURE_RATE * config.replicates as f64 || ok == 0 {
            return Err(Error::TooManyFailures { similarity: *c, failed: failures.len(), total: config.replicates, first: failures[0].clone() });
        }
        let values = sums.iter().map(|s| s / ok as f64).collect();
        rows.push(Row { similarity: *c, values, replicates_ok: ok, failures });
    }
    Report::new(columns, config.estimator_columns(), rows, serde_json::to_value(config)?)
}
