//! Transfer methods used to check zone verdicts: naive pooling and TrAdaBoost.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{mean_loss, Dataset, LossKind, TaskKind};
use crate::error::{Error, Result};
use crate::math::{ln, sqrt};
use crate::models::{fit, fit_weighted, FittedModel, ModelSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransferMethod {
    Naive,
    #[serde(rename = "tradaboost")]
    TrAdaBoost,
}

impl TransferMethod {
    pub fn id(self) -> &'static str {
        match self {
            TransferMethod::Naive => "naive",
            TransferMethod::TrAdaBoost => "tradaboost",
        }
    }
}

impl fmt::Display for TransferMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for TransferMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "naive" => Ok(TransferMethod::Naive),
            "tradaboost" => Ok(TransferMethod::TrAdaBoost),
            other => Err(Error::invalid(format!("unknown transfer method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferOutcome {
    pub method: String,
    /// Error on the held-out target data.
    pub test_error: f64,
    /// Error of the same learner trained on the target rows only.
    pub baseline_error: f64,
    pub beat_baseline: bool,
}

impl TransferOutcome {
    fn new(method: TransferMethod, test_error: f64, baseline_error: f64) -> Self {
        TransferOutcome { method: method.id().into(), test_error, baseline_error, beat_baseline: test_error < baseline_error }
    }
}

fn baseline(model: &ModelSpec, target_train: &Dataset, target_test: &Dataset, loss: LossKind) -> Result<f64> {
    let m = fit(model, target_train)?;
    mean_loss(&m.predict(target_test)?, target_test.labels(), loss)
}

/// Fits on the rows of `target_train` and `source` together and evaluates on
/// `target_test`. Without source rows the outcome is the baseline itself.
pub fn naive_pool_transfer(
    model: &ModelSpec,
    target_train: &Dataset,
    source: Option<&Dataset>,
    target_test: &Dataset,
    loss: LossKind,
) -> Result<TransferOutcome> {
    target_train.check_compatible(target_test)?;
    let base = baseline(model, target_train, target_test, loss)?;
    let Some(source) = source else {
        return Ok(TransferOutcome::new(TransferMethod::Naive, base, base));
    };
    target_train.check_compatible(source)?;
    let pooled = target_train.concat(source)?;
    let m = fit(model, &pooled)?;
    let err = mean_loss(&m.predict(target_test)?, target_test.labels(), loss)?;
    Ok(TransferOutcome::new(TransferMethod::Naive, err, base))
}

/// Fitted TrAdaBoost ensemble.
#[derive(Debug, Clone)]
pub struct TrAdaBoostModel {
    pub learners: Vec<FittedModel>,
    /// `β_t = ε_t / (1 - ε_t)` per kept round.
    pub betas: Vec<f64>,
    /// Fixed source multiplier `1 / (1 + sqrt(2 ln n_s / rounds))`.
    pub beta_source: f64,
    /// Share of the total weight on source rows: initially and after every round.
    pub source_mass: Vec<f64>,
    /// Weighted target error of every round, including a rejected last one.
    pub target_errors: Vec<f64>,
    pub stopped_early: bool,
}

impl TrAdaBoostModel {
    /// Learners voting in the final hypothesis: the last half, rounded up.
    pub fn voters(&self) -> core::ops::Range<usize> {
        let m = self.learners.len();
        (m - m.div_ceil(2))..m
    }

    /// Class 1 when `Σ ln(1/β_t) h_t(x) >= ½ Σ ln(1/β_t)` over the voters.
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut lhs = 0.0;
        let mut rhs = 0.0;
        for t in self.voters() {
            let a = ln(1.0 / self.betas[t]);
            lhs += a * self.learners[t].predict_row(row);
            rhs += 0.5 * a;
        }
        f64::from(lhs >= rhs)
    }

    pub fn predict(&self, data: &Dataset) -> Result<Vec<f64>> {
        let p = self.learners[0].p();
        if data.p() != p {
            return Err(Error::DimensionMismatch { expected: p, got: data.p() });
        }
        Ok(data.rows().map(|r| self.predict_row(r)).collect())
    }
}

/// Smallest weighted target error, keeping `β_t` positive.
const MIN_ROUND_ERROR: f64 = 1e-10;

/// Runs TrAdaBoost with `base` as the weighted learner. Source rows that the
/// current learner gets wrong are down-weighted by the fixed `β`, target rows
/// it gets wrong are up-weighted by `1/β_t`. Stops early when a round's
/// weighted target error reaches one half; that round's learner is dropped
/// unless it is the only one.
pub fn tradaboost_fit(base: &ModelSpec, target_train: &Dataset, source: &Dataset, rounds: usize, seed: u64) -> Result<TrAdaBoostModel> {
    if target_train.task() != TaskKind::Binary {
        return Err(Error::UnsupportedTask(format!("TrAdaBoost needs a binary task, got {}", target_train.task())));
    }
    if rounds < 2 {
        return Err(Error::invalid(format!("TrAdaBoost needs at least 2 rounds, got {rounds}")));
    }
    target_train.check_compatible(source)?;
    let ns = source.n();
    let nt = target_train.n();
    let pooled = source.concat(target_train)?;
    let labels = pooled.labels().to_vec();
    let beta_source = 1.0 / (1.0 + sqrt(2.0 * ln(ns as f64) / rounds as f64));
    let mut w = vec![1.0; ns + nt];
    let mass = |w: &[f64]| w[..ns].iter().sum::<f64>() / w.iter().sum::<f64>();
    let mut model = TrAdaBoostModel {
        learners: Vec::new(),
        betas: Vec::new(),
        beta_source,
        source_mass: vec![mass(&w)],
        target_errors: Vec::new(),
        stopped_early: false,
    };
    for t in 0..rounds {
        let total: f64 = w.iter().sum();
        let p: Vec<f64> = w.iter().map(|v| v / total).collect();
        let h = fit_weighted(base, &pooled, &p, seed.wrapping_add(t as u64))?;
        let pred = h.predict(&pooled)?;
        let miss: Vec<f64> = pred.iter().zip(&labels).map(|(a, b)| if a == b { 0.0 } else { 1.0 }).collect();
        let wt: f64 = w[ns..].iter().sum();
        let err = w[ns..].iter().zip(&miss[ns..]).map(|(a, m)| a * m).sum::<f64>() / wt;
        model.target_errors.push(err);
        if err >= 0.5 {
            model.stopped_early = true;
            if model.learners.is_empty() {
                model.learners.push(h);
                model.betas.push(1.0 - MIN_ROUND_ERROR);
            }
            break;
        }
        let err = err.max(MIN_ROUND_ERROR);
        let beta_t = err / (1.0 - err);
        for i in 0..ns {
            if miss[i] > 0.0 {
                w[i] *= beta_source;
            }
        }
        for i in ns..ns + nt {
            if miss[i] > 0.0 {
                w[i] /= beta_t;
            }
        }
        model.learners.push(h);
        model.betas.push(beta_t);
        model.source_mass.push(mass(&w));
    }
    Ok(model)
}

/// TrAdaBoost evaluated against the base learner trained on the target rows.
pub fn tradaboost(
    base: &ModelSpec,
    target_train: &Dataset,
    source: Option<&Dataset>,
    target_test: &Dataset,
    rounds: usize,
    seed: u64,
) -> Result<TransferOutcome> {
    target_train.check_compatible(target_test)?;
    let loss = LossKind::ZeroOne;
    if target_train.task() != TaskKind::Binary {
        return Err(Error::UnsupportedTask(format!("TrAdaBoost needs a binary task, got {}", target_train.task())));
    }
    let base_err = baseline(base, target_train, target_test, loss)?;
    let Some(source) = source else {
        return Ok(TransferOutcome::new(TransferMethod::TrAdaBoost, base_err, base_err));
    };
    let model = tradaboost_fit(base, target_train, source, rounds, seed)?;
    let err = mean_loss(&model.predict(target_test)?, target_test.labels(), loss)?;
    Ok(TransferOutcome::new(TransferMethod::TrAdaBoost, err, base_err))
}

/// Runs `method` with its default settings.
pub fn run_method(
    method: TransferMethod,
    base: &ModelSpec,
    target_train: &Dataset,
    source: Option<&Dataset>,
    target_test: &Dataset,
    rounds: usize,
    seed: u64,
) -> Result<TransferOutcome> {
    match method {
        TransferMethod::Naive => naive_pool_transfer(base, target_train, source, target_test, target_train.task().default_loss()),
        TransferMethod::TrAdaBoost => tradaboost(base, target_train, source, target_test, rounds, seed),
    }
}
