//! Cross-learning score estimators and oracles.
//!
//! A score needs two directional errors: `e_t`, the loss of a target-trained
//! predictor on the source data, and `e_s`, the loss of a source-trained
//! predictor on the target data. `CLS = (e_t + e_s) / 2`, or
//! `w·e_t + (1 - w)·e_s` for the asymmetric variant.
//!
//! The estimators share their expensive part. [`DomainFit`] holds the full-data
//! fits and cross-validation results of a model list on one dataset, and
//! [`CrossFit`] evaluates two of them against each other; every scheme is then
//! a cheap combination of the stored predictions.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dataset::{make_folds, mean_loss, Dataset, FoldPlan, LossKind};
use crate::error::{Error, Result};
use crate::math::{self, angle_between, cos, norm, norm_cdf, sqrt, PI};
use crate::models::{self, cv_error, Algorithm, CvResult, FittedModel, ModelSpec};
use crate::rng;
use crate::synth::OracleModel;

/// Default softmax temperature for the cross-validation weights.
pub const DEFAULT_LAMBDA: f64 = 500.0;
pub const DEFAULT_FOLDS: usize = 5;
/// Default Monte-Carlo sample count per direction.
pub const DEFAULT_MC_SAMPLES: usize = 200_000;
pub const MIN_MC_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "model", rename_all = "kebab-case")]
pub enum Scheme {
    Single(Algorithm),
    UnweightedAvg,
    WeightedAvg,
    Ensemble,
    Oracle,
    MonteCarloOracle,
}

/// Per-model contribution to an averaged score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelScore {
    pub algorithm: Algorithm,
    pub e_t: f64,
    pub e_s: f64,
    pub score: f64,
    pub cv_target: Option<f64>,
    pub cv_source: Option<f64>,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClsEstimate {
    pub score: f64,
    pub e_t: f64,
    pub e_s: f64,
    pub scheme: Scheme,
    /// Weight on `e_t`; 0.5 for the symmetric score.
    pub w: f64,
    pub lambda: Option<f64>,
    /// Target-side and source-side model weights of the ensemble, or the
    /// averaged weights of the weighted average.
    pub weights_target: Vec<f64>,
    pub weights_source: Vec<f64>,
    pub models: Vec<ModelScore>,
    /// Models dropped because a fit or cross-validation failed, with the reason.
    pub excluded: Vec<String>,
    pub seed: Option<u64>,
    /// Monte-Carlo standard error of the score.
    pub mc_se: Option<f64>,
}

impl ClsEstimate {
    fn new(scheme: Scheme, e_t: f64, e_s: f64) -> Self {
        ClsEstimate {
            score: 0.5 * (e_t + e_s),
            e_t,
            e_s,
            scheme,
            w: 0.5,
            lambda: None,
            weights_target: Vec::new(),
            weights_source: Vec::new(),
            models: Vec::new(),
            excluded: Vec::new(),
            seed: None,
            mc_se: None,
        }
    }

    /// Re-weights the two directions: `score = w·e_t + (1 - w)·e_s`.
    pub fn with_weight(mut self, w: f64) -> Result<Self> {
        self.score = cls_weighted_asymmetric(w, self.e_t, self.e_s)?;
        self.w = w;
        Ok(self)
    }
}

/// `w·e_t + (1 - w)·e_s` for `0 < w < 1`.
pub fn cls_weighted_asymmetric(w: f64, e_t: f64, e_s: f64) -> Result<f64> {
    if !(w > 0.0 && w < 1.0) {
        return Err(Error::invalid(format!("weight must lie in (0, 1), got {w}")));
    }
    Ok(w * e_t + (1.0 - w) * e_s)
}

/// Softmax weights `exp(-λ E_i) / Σ exp(-λ E_j)` over cross-validation errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleWeights {
    pub lambda: f64,
    pub cv_errors: Vec<f64>,
    pub weights: Vec<f64>,
}

impl EnsembleWeights {
    pub fn new(cv_errors: &[f64], lambda: f64) -> Result<Self> {
        if cv_errors.is_empty() {
            return Err(Error::invalid("no models to weight"));
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::invalid(format!("lambda must be finite and non-negative, got {lambda}")));
        }
        Ok(EnsembleWeights { lambda, cv_errors: cv_errors.to_vec(), weights: math::softmax_neg(cv_errors, lambda) })
    }
}

fn fold_seed(seed: u64, source: bool) -> u64 {
    if source {
        seed ^ 0x9E37_79B9_7F4A_7C15
    } else {
        seed
    }
}

/// Fits and cross-validation of a model list on one dataset.
#[derive(Debug, Clone)]
pub struct DomainFit {
    pub specs: Vec<ModelSpec>,
    pub fits: Vec<Option<FittedModel>>,
    pub cv: Vec<Option<CvResult>>,
    /// Failure reason per model, if any.
    pub failures: Vec<Option<String>>,
    pub folds: Option<FoldPlan>,
    pub loss: LossKind,
    pub n: usize,
    pub k_classes: Option<usize>,
}

impl DomainFit {
    /// Fits every model on all of `data`; with `cv = Some((k, seed))` also runs
    /// `k`-fold cross-validation. A failing model is recorded, not fatal.
    pub fn new(specs: &[ModelSpec], data: &Dataset, cv: Option<(usize, u64)>, loss: LossKind) -> Result<Self> {
        if specs.is_empty() {
            return Err(Error::invalid("model list is empty"));
        }
        loss.check_task(data.task())?;
        let folds = match cv {
            Some((k, seed)) => Some(make_folds(data, k, seed)?),
            None => None,
        };
        let mut fits = Vec::with_capacity(specs.len());
        let mut cvs = Vec::with_capacity(specs.len());
        let mut failures = Vec::with_capacity(specs.len());
        for spec in specs {
            let fitted = models::fit(spec, data);
            let cv_res = match (&fitted, &folds) {
                (Ok(_), Some(f)) => Some(cv_error(spec, data, f, loss)),
                _ => None,
            };
            match (fitted, cv_res) {
                (Err(e), _) | (Ok(_), Some(Err(e))) => {
                    fits.push(None);
                    cvs.push(None);
                    failures.push(Some(format!("{}: {e}", spec.algorithm)));
                }
                (Ok(m), cv_res) => {
                    fits.push(Some(m));
                    cvs.push(cv_res.map(|r| r.expect("error arm handled")));
                    failures.push(None);
                }
            }
        }
        Ok(DomainFit {
            specs: specs.to_vec(),
            fits,
            cv: cvs,
            failures,
            folds,
            loss,
            n: data.n(),
            k_classes: data.task().classes(),
        })
    }

    pub fn has_cv(&self) -> bool {
        self.folds.is_some()
    }

    /// Indices of models that fitted (and cross-validated, when requested).
    pub fn usable(&self) -> Vec<usize> {
        (0..self.specs.len()).filter(|i| self.failures[*i].is_none()).collect()
    }

    /// Softmax weights over the cross-validation errors of `models`.
    pub fn weights(&self, models: &[usize], lambda: f64) -> Result<EnsembleWeights> {
        let errors: Vec<f64> = models
            .iter()
            .map(|i| self.cv[*i].as_ref().map(|c| c.mean).ok_or_else(|| Error::invalid("cross-validation was not run")))
            .collect::<Result<_>>()?;
        EnsembleWeights::new(&errors, lambda)
    }

    /// Cross-validated loss of the weighted ensemble of `models`: each held-out
    /// row is predicted by blending the members' out-of-fold predictions.
    /// Returns per-fold losses.
    pub fn ensemble_fold_losses(&self, models: &[usize], weights: &[f64], labels: &[f64]) -> Result<Vec<f64>> {
        let folds = self.folds.as_ref().ok_or_else(|| Error::invalid("cross-validation was not run"))?;
        let mut out = Vec::with_capacity(folds.k);
        for fold in 0..folds.k {
            let rows = folds.test_indices(fold);
            let mut preds = Vec::with_capacity(rows.len());
            let mut truth = Vec::with_capacity(rows.len());
            for r in &rows {
                let member: Option<Vec<f64>> = models.iter().map(|m| self.cv[*m].as_ref().and_then(|c| c.oof[*r])).collect();
                let Some(member) = member else { continue };
                preds.push(blend(&member, weights, self.k_classes));
                truth.push(labels[*r]);
            }
            if !preds.is_empty() {
                out.push(mean_loss(&preds, &truth, self.loss)?);
            }
        }
        if out.is_empty() {
            return Err(Error::invalid("no fold has out-of-fold predictions from every model"));
        }
        Ok(out)
    }
}

/// Weighted one-hot vote (classification, ties to the smaller id) or weighted
/// sum (regression) of member predictions.
pub fn blend(predictions: &[f64], weights: &[f64], classes: Option<usize>) -> f64 {
    match classes {
        Some(k) => {
            let mut votes = vec![0.0; k];
            for (p, w) in predictions.iter().zip(weights) {
                votes[*p as usize] += w;
            }
            math::argmax(&votes) as f64
        }
        None => predictions.iter().zip(weights).map(|(p, w)| p * w).sum(),
    }
}

/// Two domain fits evaluated on each other's data.
#[derive(Debug, Clone)]
pub struct CrossFit<'a> {
    pub target: &'a DomainFit,
    pub source: &'a DomainFit,
    /// Target-trained predictions on the source rows, per model.
    on_source: Vec<Option<Vec<f64>>>,
    /// Source-trained predictions on the target rows, per model.
    on_target: Vec<Option<Vec<f64>>>,
    source_labels: Vec<f64>,
    target_labels: Vec<f64>,
    excluded: Vec<String>,
    usable: Vec<usize>,
    pub seed: Option<u64>,
}

impl<'a> CrossFit<'a> {
    pub fn new(target: &'a DomainFit, target_data: &Dataset, source: &'a DomainFit, source_data: &Dataset) -> Result<Self> {
        target_data.check_compatible(source_data)?;
        if target.specs != source.specs {
            return Err(Error::invalid("target and source were fitted with different model lists"));
        }
        let mut excluded = Vec::new();
        let mut usable = Vec::new();
        let mut on_source = Vec::with_capacity(target.specs.len());
        let mut on_target = Vec::with_capacity(target.specs.len());
        for i in 0..target.specs.len() {
            let id = target.specs[i].algorithm;
            let pair = match (&target.fits[i], &source.fits[i]) {
                (Some(mt), Some(ms)) => mt.predict(source_data).and_then(|a| ms.predict(target_data).map(|b| (a, b))),
                _ => {
                    let why = target.failures[i].clone().or_else(|| source.failures[i].clone()).unwrap_or_default();
                    Err(Error::invalid(why))
                }
            };
            match pair {
                Ok((a, b)) => {
                    on_source.push(Some(a));
                    on_target.push(Some(b));
                    usable.push(i);
                }
                Err(e) => {
                    on_source.push(None);
                    on_target.push(None);
                    let msg = e.to_string();
                    excluded.push(if msg.starts_with(id.id()) { msg } else { format!("{id}: {msg}") });
                }
            }
        }
        if usable.is_empty() {
            return Err(Error::invalid(format!("every model failed: {}", excluded.join("; "))));
        }
        Ok(CrossFit {
            target,
            source,
            on_source,
            on_target,
            source_labels: source_data.labels().to_vec(),
            target_labels: target_data.labels().to_vec(),
            excluded,
            usable,
            seed: None,
        })
    }

    pub fn usable(&self) -> &[usize] {
        &self.usable
    }

    fn directional(&self, i: usize) -> Result<(f64, f64)> {
        let a = self.on_source[i].as_ref().ok_or_else(|| Error::invalid("model was excluded"))?;
        let b = self.on_target[i].as_ref().ok_or_else(|| Error::invalid("model was excluded"))?;
        Ok((mean_loss(a, &self.source_labels, self.target.loss)?, mean_loss(b, &self.target_labels, self.target.loss)?))
    }

    fn finish(&self, mut est: ClsEstimate) -> ClsEstimate {
        est.excluded = self.excluded.clone();
        est.seed = self.seed;
        est
    }

    /// Score of the `i`-th model alone.
    pub fn single(&self, i: usize) -> Result<ClsEstimate> {
        let (e_t, e_s) = self.directional(i)?;
        let algorithm = self.target.specs[i].algorithm;
        let mut est = ClsEstimate::new(Scheme::Single(algorithm), e_t, e_s);
        est.models.push(ModelScore { algorithm, e_t, e_s, score: est.score, cv_target: None, cv_source: None, weight: 1.0 });
        Ok(self.finish(est))
    }

    fn model_scores(&self, wt: &EnsembleWeights, ws: &EnsembleWeights, averaged: &[f64]) -> Result<Vec<ModelScore>> {
        self.usable
            .iter()
            .enumerate()
            .map(|(j, i)| {
                let (e_t, e_s) = self.directional(*i)?;
                Ok(ModelScore {
                    algorithm: self.target.specs[*i].algorithm,
                    e_t,
                    e_s,
                    score: 0.5 * (e_t + e_s),
                    cv_target: Some(wt.cv_errors[j]),
                    cv_source: Some(ws.cv_errors[j]),
                    weight: averaged[j],
                })
            })
            .collect()
    }

    /// Convex combination of per-model scores with weights
    /// `(w_t + w_s) / 2`; `lambda = 0` gives the plain average.
    pub fn weighted_avg(&self, lambda: f64) -> Result<ClsEstimate> {
        let wt = self.target.weights(&self.usable, lambda)?;
        let ws = self.source.weights(&self.usable, lambda)?;
        let avg: Vec<f64> = wt.weights.iter().zip(&ws.weights).map(|(a, b)| 0.5 * (a + b)).collect();
        let models = self.model_scores(&wt, &ws, &avg)?;
        let e_t = models.iter().zip(&avg).map(|(m, w)| w * m.e_t).sum();
        let e_s = models.iter().zip(&avg).map(|(m, w)| w * m.e_s).sum();
        let scheme = if lambda == 0.0 { Scheme::UnweightedAvg } else { Scheme::WeightedAvg };
        let mut est = ClsEstimate::new(scheme, e_t, e_s);
        est.lambda = Some(lambda);
        est.weights_target = avg.clone();
        est.weights_source = avg;
        est.models = models;
        Ok(self.finish(est))
    }

    /// Cross-evaluation of the weighted ensembles: the target ensemble uses
    /// weights from target cross-validation, the source ensemble from source
    /// cross-validation.
    pub fn ensemble(&self, lambda: f64) -> Result<ClsEstimate> {
        let wt = self.target.weights(&self.usable, lambda)?;
        let ws = self.source.weights(&self.usable, lambda)?;
        let classes = self.target.k_classes;
        let blend_all = |preds: &[Option<Vec<f64>>], weights: &[f64], rows: usize| -> Vec<f64> {
            let mut member = vec![0.0; self.usable.len()];
            (0..rows)
                .map(|r| {
                    for (j, i) in self.usable.iter().enumerate() {
                        member[j] = preds[*i].as_ref().expect("usable model")[r];
                    }
                    blend(&member, weights, classes)
                })
                .collect()
        };
        let on_source = blend_all(&self.on_source, &wt.weights, self.source_labels.len());
        let on_target = blend_all(&self.on_target, &ws.weights, self.target_labels.len());
        let e_t = mean_loss(&on_source, &self.source_labels, self.target.loss)?;
        let e_s = mean_loss(&on_target, &self.target_labels, self.target.loss)?;
        let avg: Vec<f64> = wt.weights.iter().zip(&ws.weights).map(|(a, b)| 0.5 * (a + b)).collect();
        let mut est = ClsEstimate::new(Scheme::Ensemble, e_t, e_s);
        est.lambda = Some(lambda);
        est.models = self.model_scores(&wt, &ws, &avg)?;
        est.weights_target = wt.weights;
        est.weights_source = ws.weights;
        Ok(self.finish(est))
    }
}

/// Score of one model: fit on each dataset, evaluate on the other.
pub fn cls_single(model: &ModelSpec, target: &Dataset, source: &Dataset, loss: LossKind) -> Result<ClsEstimate> {
    target.check_compatible(source)?;
    let specs = [model.clone()];
    let t = DomainFit::new(&specs, target, None, loss)?;
    if let Some(why) = &t.failures[0] {
        return Err(Error::invalid(why.clone()));
    }
    let s = DomainFit::new(&specs, source, None, loss)?;
    if let Some(why) = &s.failures[0] {
        return Err(Error::invalid(why.clone()));
    }
    CrossFit::new(&t, target, &s, source)?.single(0)
}

fn cross_with_cv(models: &[ModelSpec], target: &Dataset, source: &Dataset, folds_k: usize, seed: u64, loss: LossKind) -> Result<(DomainFit, DomainFit)> {
    target.check_compatible(source)?;
    let t = DomainFit::new(models, target, Some((folds_k, fold_seed(seed, false))), loss)?;
    let s = DomainFit::new(models, source, Some((folds_k, fold_seed(seed, true))), loss)?;
    Ok((t, s))
}

/// Weighted average of per-model scores (scheme with `λ = 0` is the plain average).
pub fn cls_weighted_avg(
    models: &[ModelSpec],
    target: &Dataset,
    source: &Dataset,
    folds_k: usize,
    lambda: f64,
    loss: LossKind,
    seed: u64,
) -> Result<ClsEstimate> {
    let (t, s) = cross_with_cv(models, target, source, folds_k, seed, loss)?;
    let mut cf = CrossFit::new(&t, target, &s, source)?;
    cf.seed = Some(seed);
    cf.weighted_avg(lambda)
}

/// Weighted-ensemble score.
pub fn cls_ensemble(
    models: &[ModelSpec],
    target: &Dataset,
    source: &Dataset,
    folds_k: usize,
    lambda: f64,
    loss: LossKind,
    seed: u64,
) -> Result<ClsEstimate> {
    let (t, s) = cross_with_cv(models, target, source, folds_k, seed, loss)?;
    let mut cf = CrossFit::new(&t, target, &s, source)?;
    cf.seed = Some(seed);
    cf.ensemble(lambda)
}

/// Probit coefficient pair with the noise variance of the latent score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbitOracleParams {
    pub beta_target: Vec<f64>,
    pub beta_source: Vec<f64>,
    pub noise_var: f64,
}

impl ProbitOracleParams {
    fn check(&self) -> Result<()> {
        if self.beta_target.len() != self.beta_source.len() {
            return Err(Error::LengthMismatch { left: self.beta_target.len(), right: self.beta_source.len() });
        }
        if !(norm(&self.beta_target) > 0.0 && norm(&self.beta_source) > 0.0) {
            return Err(Error::invalid("probit coefficients must be non-zero"));
        }
        if !(self.noise_var >= 0.0 && self.noise_var.is_finite()) {
            return Err(Error::invalid(format!("noise variance must be non-negative, got {}", self.noise_var)));
        }
        Ok(())
    }

    /// `(rho_1, rho_2)`: the correlation between the noisy target score and the
    /// source score, and between the target score and the noisy source score.
    pub fn rhos(&self) -> Result<(f64, f64)> {
        let (a1, a2) = self.angles()?;
        Ok((cos(a1), cos(a2)))
    }

    /// `(acos rho_1, acos rho_2)`. Each correlation is the cosine between
    /// coefficient vectors augmented by the noise scale, `(β_t, σ)` against
    /// `(β_s, 0)` and `(β_t, 0)` against `(β_s, σ)`, so the angles are taken
    /// directly from those vectors.
    pub fn angles(&self) -> Result<(f64, f64)> {
        self.check()?;
        let sigma = sqrt(self.noise_var);
        let aug = |v: &[f64], s: f64| {
            let mut out = v.to_vec();
            out.push(s);
            out
        };
        let a1 = angle_between(&aug(&self.beta_target, sigma), &aug(&self.beta_source, 0.0));
        let a2 = angle_between(&aug(&self.beta_target, 0.0), &aug(&self.beta_source, sigma));
        Ok((a1, a2))
    }

    pub fn theta(&self) -> Result<f64> {
        self.check()?;
        Ok(angle_between(&self.beta_target, &self.beta_source))
    }

    /// `(e_t, e_s)`. The target rule applied to source data disagrees with the
    /// noisy source labels with probability `acos(rho_2) / π`.
    pub fn directional(&self) -> Result<(f64, f64)> {
        let (a1, a2) = self.angles()?;
        Ok((a2 / PI, a1 / PI))
    }
}

/// Closed-form probit score `(acos ρ1 + acos ρ2) / 2π`.
pub fn oracle_probit(params: &ProbitOracleParams) -> Result<f64> {
    let (a1, a2) = params.angles()?;
    Ok((a1 + a2) / (2.0 * PI))
}

/// Small-noise probit score `θ / π`.
pub fn oracle_probit_smallnoise(theta: f64) -> Result<f64> {
    if !(0.0..=PI).contains(&theta) {
        return Err(Error::invalid(format!("angle must lie in [0, π], got {theta}")));
    }
    Ok(theta / PI)
}

/// Class means of two balanced `N(±μ, I)` problems.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaOracleParams {
    pub mu_target: Vec<f64>,
    pub mu_source: Vec<f64>,
}

impl LdaOracleParams {
    pub fn cosine(&self) -> Result<f64> {
        if self.mu_target.len() != self.mu_source.len() {
            return Err(Error::LengthMismatch { left: self.mu_target.len(), right: self.mu_source.len() });
        }
        let (a, b) = (norm(&self.mu_target), norm(&self.mu_source));
        if !(a > 0.0 && b > 0.0) {
            return Err(Error::invalid("class means must be non-zero"));
        }
        Ok((math::dot(&self.mu_target, &self.mu_source) / (a * b)).clamp(-1.0, 1.0))
    }

    /// `(e_t, e_s) = (Φ(-‖μ_s‖ cos θ), Φ(-‖μ_t‖ cos θ))`.
    pub fn directional(&self) -> Result<(f64, f64)> {
        let c = self.cosine()?;
        Ok((norm_cdf(-norm(&self.mu_source) * c), norm_cdf(-norm(&self.mu_target) * c)))
    }
}

/// Closed-form LDA score `½[Φ(-‖μ_s‖ cos θ) + Φ(-‖μ_t‖ cos θ)]`.
pub fn oracle_lda(params: &LdaOracleParams) -> Result<f64> {
    let (a, b) = params.directional()?;
    Ok(0.5 * (a + b))
}

/// Closed-form oracle as an estimate.
pub fn oracle_estimate(e_t: f64, e_s: f64) -> ClsEstimate {
    ClsEstimate::new(Scheme::Oracle, e_t, e_s)
}

/// Monte-Carlo score of two Bayes rules: `e_t` averages the target rule's loss
/// over `samples` draws from the source distribution, `e_s` the reverse.
pub fn oracle_monte_carlo(target: &OracleModel, source: &OracleModel, samples: usize, seed: u64) -> Result<ClsEstimate> {
    if target.p() != source.p() {
        return Err(Error::DimensionMismatch { expected: target.p(), got: source.p() });
    }
    if target.task() != source.task() {
        return Err(Error::invalid(format!("oracle tasks differ: {} vs {}", target.task(), source.task())));
    }
    if samples < MIN_MC_SAMPLES {
        return Err(Error::invalid(format!("need at least {MIN_MC_SAMPLES} Monte-Carlo samples, got {samples}")));
    }
    let loss = target.task().default_loss();
    let (e_t, se_t) = mc_direction(target, source, samples, rng::stream(seed, 0x0AC1_E001), loss);
    let (e_s, se_s) = mc_direction(source, target, samples, rng::stream(seed, 0x0AC1_E002), loss);
    let mut est = ClsEstimate::new(Scheme::MonteCarloOracle, e_t, e_s);
    est.mc_se = Some(0.5 * sqrt(se_t * se_t + se_s * se_s));
    est.seed = Some(seed);
    Ok(est)
}

/// Mean loss of `rule`'s Bayes predictor on draws from `data`, with its standard error.
fn mc_direction(rule: &OracleModel, data: &OracleModel, samples: usize, mut r: rng::Rng, loss: LossKind) -> (f64, f64) {
    let mut x = vec![0.0; data.p()];
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for i in 0..samples {
        let y = data.sample_into(&mut r, i, &mut x);
        let pred = rule.predict_one(&x);
        let l = match loss {
            LossKind::ZeroOne => f64::from(pred != y),
            LossKind::SquaredError => (pred - y) * (pred - y),
        };
        sum += l;
        sum_sq += l * l;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
    (mean, sqrt(var / n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{sample_dataset, GeneratorSpec, Role, Setting, SettingKind};

    #[test]
    fn asymmetric_examples() {
        assert!((cls_weighted_asymmetric(0.5, 0.2, 0.4).unwrap() - 0.3).abs() < 1e-15);
        assert!((cls_weighted_asymmetric(0.999, 0.2, 0.4).unwrap() - 0.2002).abs() < 1e-12);
        assert!((cls_weighted_asymmetric(0.25, 0.0, 1.0).unwrap() - 0.75).abs() < 1e-15);
        assert!(cls_weighted_asymmetric(1.0, 0.2, 0.4).is_err());
        assert!(cls_weighted_asymmetric(0.0, 0.2, 0.4).is_err());
    }

    #[test]
    fn probit_oracle_examples() {
        let orth = ProbitOracleParams { beta_target: vec![1.0, 0.0], beta_source: vec![0.0, 2.0], noise_var: 3.0 };
        assert_eq!(oracle_probit(&orth).unwrap(), 0.5);
        let half = ProbitOracleParams { beta_target: vec![1.0, 0.0], beta_source: vec![0.5, 0.75f64.sqrt()], noise_var: 0.0 };
        assert!((oracle_probit(&half).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        let opposite = ProbitOracleParams { beta_target: vec![1.0, 2.0], beta_source: vec![-1.0, -2.0], noise_var: 0.0 };
        assert!((oracle_probit(&opposite).unwrap() - 1.0).abs() < 1e-12);
        let zero = ProbitOracleParams { beta_target: vec![0.0, 0.0], beta_source: vec![1.0, 0.0], noise_var: 1.0 };
        assert!(oracle_probit(&zero).is_err());
    }

    #[test]
    fn smallnoise_examples() {
        assert_eq!(oracle_probit_smallnoise(0.0).unwrap(), 0.0);
        assert_eq!(oracle_probit_smallnoise(PI).unwrap(), 1.0);
        assert_eq!(oracle_probit_smallnoise(PI / 2.0).unwrap(), 0.5);
        assert!(oracle_probit_smallnoise(-0.1).is_err());
        assert!(oracle_probit_smallnoise(3.2).is_err());
    }

    #[test]
    fn lda_oracle_endpoints() {
        let mu = vec![0.3; 10];
        let same = LdaOracleParams { mu_target: mu.clone(), mu_source: mu.clone() };
        let flipped = LdaOracleParams { mu_target: mu.clone(), mu_source: mu.iter().map(|v| -v).collect() };
        assert!((oracle_lda(&same).unwrap() - 0.1714).abs() < 1e-4);
        assert!((oracle_lda(&flipped).unwrap() - 0.8286).abs() < 1e-4);
        let mut orth = vec![0.0; 10];
        orth[0] = 1.0;
        let ortho = LdaOracleParams { mu_target: orth.clone(), mu_source: { let mut v = vec![0.0; 10]; v[1] = 2.0; v } };
        assert_eq!(oracle_lda(&ortho).unwrap(), 0.5);
    }

    #[test]
    fn lambda_zero_is_uniform_and_large_lambda_picks_best() {
        let w = EnsembleWeights::new(&[0.1, 0.2, 0.3], 0.0).unwrap();
        assert!(w.weights.iter().all(|v| *v == 1.0 / 3.0));
        let w = EnsembleWeights::new(&[0.1, 0.2], 500.0).unwrap();
        let expected = 1.0 / (1.0 + (-50.0f64).exp());
        assert!((w.weights[0] - expected).abs() < 1e-15);
    }

    #[test]
    fn blend_breaks_ties_toward_smaller_class() {
        assert_eq!(blend(&[2.0, 1.0], &[0.5, 0.5], Some(3)), 1.0);
        assert_eq!(blend(&[0.0, 1.0, 1.0], &[0.5, 0.3, 0.2], Some(2)), 0.0);
        assert_eq!(blend(&[1.0, 3.0], &[0.25, 0.75], None), 2.5);
    }

    fn lda_pair(seed: u64, cosine: f64) -> (Dataset, Dataset) {
        let mut r = rng::seeded(seed);
        let setting = Setting::draw(SettingKind::Lda, cosine, 10, &mut r).unwrap();
        let t = sample_dataset(&GeneratorSpec { setting: setting.clone(), role: Role::Target, seed }, 200, seed).unwrap();
        let s = sample_dataset(&GeneratorSpec { setting, role: Role::Source, seed }, 200, seed + 1000).unwrap();
        (t, s)
    }

    #[test]
    fn single_model_schemes_coincide() {
        let (t, s) = lda_pair(4, 0.5);
        let spec = [ModelSpec::new(Algorithm::LogReg)];
        let single = cls_single(&spec[0], &t, &s, LossKind::ZeroOne).unwrap();
        let avg = cls_weighted_avg(&spec, &t, &s, 5, 500.0, LossKind::ZeroOne, 1).unwrap();
        let ens = cls_ensemble(&spec, &t, &s, 5, 500.0, LossKind::ZeroOne, 1).unwrap();
        assert_eq!(single.score, avg.score);
        assert_eq!(single.score, ens.score);
    }

    #[test]
    fn failing_model_is_excluded() {
        let (t, s) = lda_pair(5, 1.0);
        let specs = [ModelSpec::new(Algorithm::LogReg), ModelSpec::new(Algorithm::Ols)];
        let est = cls_ensemble(&specs, &t, &s, 5, 500.0, LossKind::ZeroOne, 1).unwrap();
        assert_eq!(est.excluded.len(), 1);
        assert_eq!(est.models.len(), 1);
        assert!(est.excluded[0].starts_with("ols"));
        let single = cls_single(&specs[0], &t, &s, LossKind::ZeroOne).unwrap();
        assert_eq!(est.score, single.score);
    }

    #[test]
    fn mc_oracle_requires_enough_samples() {
        let o = OracleModel::Lda { mu: vec![0.3; 10] };
        assert!(oracle_monte_carlo(&o, &o, 100, 1).is_err());
        let r = OracleModel::LinearRegression { beta: vec![1.0; 10], noise_var: 1.0 };
        assert!(oracle_monte_carlo(&o, &r, 20_000, 1).is_err());
    }
}
