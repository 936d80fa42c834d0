use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use cls_core::cls::{CrossFit, DomainFit, DEFAULT_FOLDS, DEFAULT_LAMBDA};
use cls_core::models::{Algorithm, ModelSpec};
use cls_core::synth::{sample_dataset, GeneratorSpec, Role, Setting, SettingKind};
use cls_core::transfer::{naive_pool_transfer, run_method, TransferMethod};
use cls_core::zone::{baseline_from_fit, classify, thresholds, Zone, DEFAULT_GAMMA1, DEFAULT_GAMMA2};
use cls_core::{rng, Dataset};

use super::sweep::MAX_FAILURE_RATE;
use super::{replicate_seeds, ReplicateSeeds};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ZoneSweepConfig {
    pub setting: SettingKind,
    pub grid: Vec<f64>,
    pub replicates: usize,
    /// Target rows drawn before picking the training rows.
    pub target_pool: usize,
    pub train_per_class: usize,
    /// Independent target rows used to score the transfer methods.
    pub n_test: usize,
    pub n_source: usize,
    pub p: usize,
    /// Ensemble members for the score and the baseline.
    pub models: Vec<ModelSpec>,
    pub lambda: f64,
    pub folds: usize,
    pub gamma1: f64,
    pub gamma2: f64,
    pub methods: Vec<TransferMethod>,
    /// Learner inside the transfer methods.
    pub base: ModelSpec,
    pub rounds: usize,
    pub seed: u64,
}

impl Default for ZoneSweepConfig {
    fn default() -> Self {
        ZoneSweepConfig::new(SettingKind::Probit)
    }
}

impl ZoneSweepConfig {
    pub fn new(setting: SettingKind) -> Self {
        let task = setting.task();
        ZoneSweepConfig {
            setting,
            grid: setting.default_grid(),
            replicates: 20,
            target_pool: 200,
            train_per_class: 30,
            n_test: 5000,
            n_source: 200,
            p: 10,
            models: ModelSpec::default_set(task),
            lambda: DEFAULT_LAMBDA,
            folds: DEFAULT_FOLDS,
            gamma1: DEFAULT_GAMMA1,
            gamma2: DEFAULT_GAMMA2,
            methods: vec![TransferMethod::Naive, TransferMethod::TrAdaBoost],
            base: ModelSpec::new(Algorithm::LogReg).adapted_to(task).unwrap_or_else(|_| ModelSpec::new(Algorithm::Gbt)),
            rounds: 20,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::usage("no transfer methods registered"));
        }
        if self.grid.is_empty() || self.grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::usage("grid must be non-empty and strictly increasing"));
        }
        if self.replicates == 0 || self.models.is_empty() {
            return Err(Error::usage("need at least one replicate and one model"));
        }
        let task = self.setting.task();
        let k = task.classes().ok_or_else(|| Error::usage("zone sweeps need a classification setting"))?;
        if self.train_per_class == 0 || self.train_per_class * k > self.target_pool {
            return Err(Error::usage("target pool is too small for the requested training rows"));
        }
        if self.methods.contains(&TransferMethod::TrAdaBoost) && task != cls_core::TaskKind::Binary {
            return Err(Error::usage("tradaboost needs a binary setting"));
        }
        thresholds(0.0, 0.0, self.gamma1, self.gamma2)?;
        self.base.validate()?;
        for m in &self.models {
            m.validate()?;
        }
        Ok(())
    }
}

/// Averages over replicates at one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoneRow {
    pub similarity: f64,
    pub cls: f64,
    pub e0: f64,
    pub se_e0: f64,
    pub tau1: f64,
    pub tau2: f64,
    /// Verdict of the averaged score against the averaged thresholds.
    pub zone: Zone,
    /// Per-replicate verdict counts.
    pub pt: usize,
    pub az: usize,
    pub nt: usize,
    /// Verdict of every replicate, `None` where it failed.
    pub verdicts: Vec<Option<Zone>>,
    /// Mean number of methods beating the baseline.
    pub methods_beating: f64,
    /// Share of replicates in which each method beat the baseline.
    pub beat_rates: Vec<f64>,
    /// Mean of baseline error minus naive pooling error.
    pub baseline_minus_naive: f64,
    pub replicates_ok: usize,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoneReport {
    pub methods: Vec<TransferMethod>,
    pub rows: Vec<ZoneRow>,
    pub config: ZoneSweepConfig,
    pub version: String,
}

impl ZoneReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("similarity,cls,e0,se_e0,tau1,tau2,zone,pt,az,nt,methods_beating,");
        for m in &self.methods {
            out.push_str(&format!("{}_beat_rate,", m.id()));
        }
        out.push_str("baseline_minus_naive,replicates_ok\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{},{},{},{},{},{},{},{},", r.similarity, r.cls, r.e0, r.se_e0, r.tau1, r.tau2, r.zone, r.pt, r.az, r.nt, r.methods_beating));
            for b in &r.beat_rates {
                out.push_str(&format!("{b},"));
            }
            out.push_str(&format!("{},{}\n", r.baseline_minus_naive, r.replicates_ok));
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

struct Outcome {
    cls: f64,
    e0: f64,
    se: f64,
    zone: Zone,
    beats: Vec<bool>,
    naive_gain: f64,
}

/// `per_class` rows of every class, in a seeded random order.
fn pick_training_rows(pool: &Dataset, per_class: usize, seed: u64) -> Result<Dataset> {
    let mut order: Vec<usize> = (0..pool.n()).collect();
    rng::shuffle(&mut rng::stream(seed, 5), &mut order);
    let ids = pool.class_ids();
    let k = pool.task().classes().unwrap_or(1);
    let mut taken = vec![0; k];
    let mut rows = Vec::with_capacity(per_class * k);
    for i in order {
        if taken[ids[i]] < per_class {
            taken[ids[i]] += 1;
            rows.push(i);
        }
    }
    if let Some(c) = taken.iter().position(|t| *t < per_class) {
        return Err(Error::usage(format!("target pool has only {} rows of class {c}", taken[c])));
    }
    rows.sort_unstable();
    Ok(pool.subset(&rows)?)
}

fn replicate(config: &ZoneSweepConfig, r: usize) -> Vec<Result<Outcome, String>> {
    let seeds = replicate_seeds(config.seed, r);
    let prepared = (|| -> Result<_> {
        let base = Setting::draw(config.setting, config.grid[0], config.p, &mut rng::stream(seeds.replicate, 0))?;
        let target_spec = GeneratorSpec::new(base.clone(), Role::Target, seeds.target_data);
        let pool = sample_dataset(&target_spec, config.target_pool, seeds.target_data)?;
        let train = pick_training_rows(&pool, config.train_per_class, seeds.replicate)?;
        let test = sample_dataset(&target_spec, config.n_test, seeds.test_data)?;
        let loss = train.task().default_loss();
        let fit = DomainFit::new(&config.models, &train, Some((config.folds, seeds.target_folds)), loss)?;
        let baseline = baseline_from_fit(&fit, &train, config.lambda, true)?;
        Ok((base, train, test, fit, baseline))
    })();
    let (base, train, test, fit, baseline) = match prepared {
        Ok(v) => v,
        Err(e) => return config.grid.iter().map(|_| Err(e.to_string())).collect(),
    };
    config
        .grid
        .iter()
        .map(|c| {
            grid_point(config, &base.with_similarity(*c), &train, &test, &fit, (baseline.e0, baseline.se), &seeds)
                .map_err(|e| e.to_string())
        })
        .collect()
}

fn grid_point(
    config: &ZoneSweepConfig,
    setting: &Setting,
    train: &Dataset,
    test: &Dataset,
    target_fit: &DomainFit,
    (e0, se): (f64, f64),
    seeds: &ReplicateSeeds,
) -> Result<Outcome> {
    let source = sample_dataset(&GeneratorSpec::new(setting.clone(), Role::Source, seeds.source_data), config.n_source, seeds.source_data)?;
    let loss = train.task().default_loss();
    let source_fit = DomainFit::new(&config.models, &source, Some((config.folds, seeds.source_folds)), loss)?;
    let cls = CrossFit::new(target_fit, train, &source_fit, &source)?.ensemble(config.lambda)?.score;
    let zone = classify(cls, &thresholds(e0, se, config.gamma1, config.gamma2)?);
    let beats = config
        .methods
        .iter()
        .map(|m| run_method(*m, &config.base, train, Some(&source), test, config.rounds, seeds.replicate).map(|o| o.beat_baseline))
        .collect::<cls_core::Result<Vec<bool>>>()?;
    let naive = naive_pool_transfer(&config.base, train, Some(&source), test, loss)?;
    Ok(Outcome { cls, e0, se, zone, beats, naive_gain: naive.baseline_error - naive.test_error })
}

/// Zone verdicts and transfer outcomes along the grid.
pub fn run_zone_experiment(config: &ZoneSweepConfig) -> Result<ZoneReport> {
    config.validate()?;
    let results: Vec<Vec<Result<Outcome, String>>> = (0..config.replicates).into_par_iter().map(|r| replicate(config, r)).collect();
    let m = config.methods.len();
    let mut rows = Vec::with_capacity(config.grid.len());
    for (g, c) in config.grid.iter().enumerate() {
        let ok: Vec<&Outcome> = results.iter().filter_map(|rep| rep[g].as_ref().ok()).collect();
        let failures: Vec<String> = results.iter().filter_map(|rep| rep[g].as_ref().err().cloned()).collect();
        if failures.len() as f64 > MAX_FAILURE_RATE * config.replicates as f64 || ok.is_empty() {
            return Err(Error::TooManyFailures { similarity: *c, failed: failures.len(), total: config.replicates, first: failures[0].clone() });
        }
        let n = ok.len() as f64;
        let mean = |f: &dyn Fn(&Outcome) -> f64| ok.iter().map(|o| f(o)).sum::<f64>() / n;
        let (cls, e0, se) = (mean(&|o| o.cls), mean(&|o| o.e0), mean(&|o| o.se));
        let t = thresholds(e0, se, config.gamma1, config.gamma2)?;
        let count = |z: Zone| ok.iter().filter(|o| o.zone == z).count();
        rows.push(ZoneRow {
            similarity: *c,
            cls,
            e0,
            se_e0: se,
            tau1: t.tau1,
            tau2: t.tau2,
            zone: classify(cls, &t),
            pt: count(Zone::PositiveTransfer),
            az: count(Zone::Ambiguous),
            nt: count(Zone::NegativeTransfer),
            verdicts: results.iter().map(|rep| rep[g].as_ref().ok().map(|o| o.zone)).collect(),
            methods_beating: mean(&|o| o.beats.iter().filter(|b| **b).count() as f64),
            beat_rates: (0..m).map(|j| mean(&|o| f64::from(u8::from(o.beats[j])))).collect(),
            baseline_minus_naive: mean(&|o| o.naive_gain),
            replicates_ok: ok.len(),
            failures,
        });
    }
    Ok(ZoneReport { methods: config.methods.clone(), rows, config: config.clone(), version: env!("CARGO_PKG_VERSION").to_string() })
}
