//! Transfer zones: compare a score against the target-only baseline error.
//!
//! With baseline cross-validated error `e0` and its standard error `se`, the
//! thresholds are `τ1 = e0 + γ1·se` and `τ2 = e0 + γ2·se`. A score below `τ1`
//! predicts positive transfer, above `τ2` negative transfer, and anything in
//! `[τ1, τ2]` is ambiguous.

use alloc::format;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cls::DomainFit;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::models::{mean_and_se, ModelSpec};

pub const DEFAULT_GAMMA1: f64 = 1.0;
pub const DEFAULT_GAMMA2: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Zone {
    #[serde(rename = "PT")]
    PositiveTransfer,
    #[serde(rename = "AZ")]
    Ambiguous,
    #[serde(rename = "NT")]
    NegativeTransfer,
}

impl Zone {
    pub fn label(self) -> &'static str {
        match self {
            Zone::PositiveTransfer => "PT",
            Zone::Ambiguous => "AZ",
            Zone::NegativeTransfer => "NT",
        }
    }

    /// 0 for PT, 1 for AZ, 2 for NT.
    pub fn rank(self) -> u8 {
        match self {
            Zone::PositiveTransfer => 0,
            Zone::Ambiguous => 1,
            Zone::NegativeTransfer => 2,
        }
    }
}

impl fmt::Display for Zone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Zone {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "PT" => Ok(Zone::PositiveTransfer),
            "AZ" => Ok(Zone::Ambiguous),
            "NT" => Ok(Zone::NegativeTransfer),
            _ => Err(Error::invalid(format!("unknown zone '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZoneThresholds {
    pub e0: f64,
    pub se_e0: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub tau1: f64,
    pub tau2: f64,
}

/// `τ_i = e0 + γ_i·se`.
pub fn thresholds(e0: f64, se: f64, gamma1: f64, gamma2: f64) -> Result<ZoneThresholds> {
    if !(se >= 0.0) || !e0.is_finite() || !se.is_finite() {
        return Err(Error::invalid(format!("need finite e0 and se >= 0, got ({e0}, {se})")));
    }
    if !(gamma1 < gamma2) {
        return Err(Error::invalid(format!("gamma1 ({gamma1}) must be below gamma2 ({gamma2})")));
    }
    Ok(ZoneThresholds { e0, se_e0: se, gamma1, gamma2, tau1: e0 + gamma1 * se, tau2: e0 + gamma2 * se })
}

/// Scores equal to either threshold fall in the ambiguous zone.
pub fn classify(score: f64, t: &ZoneThresholds) -> Zone {
    if score < t.tau1 {
        Zone::PositiveTransfer
    } else if score > t.tau2 {
        Zone::NegativeTransfer
    } else {
        Zone::Ambiguous
    }
}

/// `(e0 - e) / e0`; positive when transfer helped.
pub fn relative_error_reduction(e0: f64, e_transfer: f64) -> Result<f64> {
    if !(e0 > 0.0) {
        return Err(Error::invalid(format!("baseline error must be positive, got {e0}")));
    }
    Ok((e0 - e_transfer) / e0)
}

/// Estimator whose cross-validated error serves as the baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "kebab-case")]
pub enum BaselineScheme {
    Single { model: ModelSpec },
    WeightedAvg { models: Vec<ModelSpec>, lambda: f64 },
    Ensemble { models: Vec<ModelSpec>, lambda: f64 },
}

/// Baseline error `e0` with its standard error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    pub e0: f64,
    pub se: f64,
    pub fold_losses: Vec<f64>,
}

/// Cross-validated baseline on the target alone, using the same estimator
/// family as the score it will be compared with.
pub fn baseline_error(scheme: &BaselineScheme, target: &Dataset, folds_k: usize, seed: u64) -> Result<Baseline> {
    if folds_k < 2 {
        return Err(Error::invalid(format!("need at least 2 folds, got {folds_k}")));
    }
    let loss = target.task().default_loss();
    let (models, lambda, ensemble) = match scheme {
        BaselineScheme::Single { model } => (core::slice::from_ref(model), 0.0, false),
        BaselineScheme::WeightedAvg { models, lambda } => (models.as_slice(), *lambda, false),
        BaselineScheme::Ensemble { models, lambda } => (models.as_slice(), *lambda, true),
    };
    let fit = DomainFit::new(models, target, Some((folds_k, seed)), loss)?;
    baseline_from_fit(&fit, target, lambda, ensemble)
}

/// Baseline from an existing target [`DomainFit`] with cross-validation.
///
/// For the ensemble, every fold loss comes from weighted votes of the members'
/// out-of-fold predictions, weighted by the same cross-validation errors; for
/// the weighted average, fold losses are the weighted average of member fold
/// losses.
pub fn baseline_from_fit(fit: &DomainFit, target: &Dataset, lambda: f64, ensemble: bool) -> Result<Baseline> {
    let usable = fit.usable();
    if usable.is_empty() {
        return Err(Error::invalid("every baseline model failed"));
    }
    let weights = fit.weights(&usable, lambda)?.weights;
    let fold_losses = if ensemble {
        fit.ensemble_fold_losses(&usable, &weights, target.labels())?
    } else {
        let cvs: Vec<_> = usable.iter().map(|i| fit.cv[*i].as_ref().expect("usable model has cv")).collect();
        let folds = cvs[0].fold_losses.len();
        if cvs.iter().any(|c| c.fold_losses.len() != folds) {
            return Err(Error::invalid("models skipped different folds"));
        }
        (0..folds).map(|f| cvs.iter().zip(&weights).map(|(c, w)| w * c.fold_losses[f]).sum()).collect()
    };
    let (e0, se) = mean_and_se(&fold_losses);
    Ok(Baseline { e0, se, fold_losses })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::TaskKind;
    use crate::models::Algorithm;

    #[test]
    fn threshold_examples() {
        let t = thresholds(0.2, 0.02, 1.0, 5.0).unwrap();
        assert!((t.tau1 - 0.22).abs() < 1e-12 && (t.tau2 - 0.30).abs() < 1e-12);
        let t = thresholds(0.2, 0.0, 1.0, 5.0).unwrap();
        assert_eq!((t.tau1, t.tau2), (0.2, 0.2));
        let t = thresholds(0.408, 0.01, 1.0, 5.0).unwrap();
        assert!((t.tau1 - 0.418).abs() < 1e-12 && (t.tau2 - 0.458).abs() < 1e-12);
        assert!(thresholds(0.2, 0.01, 5.0, 1.0).is_err());
        assert!(thresholds(0.2, 0.01, 1.0, 1.0).is_err());
    }

    #[test]
    fn classify_examples_and_boundaries() {
        let t = thresholds(0.2, 0.02, 1.0, 5.0).unwrap();
        assert_eq!(classify(0.10, &t), Zone::PositiveTransfer);
        assert_eq!(classify(0.25, &t), Zone::Ambiguous);
        assert_eq!(classify(0.31, &t), Zone::NegativeTransfer);
        assert_eq!(classify(t.tau1, &t), Zone::Ambiguous);
        assert_eq!(classify(t.tau2, &t), Zone::Ambiguous);
    }

    #[test]
    fn relative_reduction_examples() {
        assert_eq!(relative_error_reduction(0.408, 0.408).unwrap(), 0.0);
        assert!((relative_error_reduction(0.408, 0.204).unwrap() - 0.5).abs() < 1e-15);
        assert!((relative_error_reduction(0.5, 0.6).unwrap() + 0.2).abs() < 1e-15);
        assert!(relative_error_reduction(0.0, 0.1).is_err());
    }

    #[test]
    fn separable_target_has_zero_baseline() {
        let rows: alloc::vec::Vec<alloc::vec::Vec<f64>> = (0..20).map(|i| alloc::vec![if i < 10 { i as f64 } else { i as f64 + 10.0 }]).collect();
        let labels = (0..20).map(|i| f64::from(i >= 10)).collect();
        let d = Dataset::from_rows(&rows, labels, TaskKind::Binary).unwrap();
        let b = baseline_error(&BaselineScheme::Single { model: ModelSpec::new(Algorithm::LogReg) }, &d, 5, 1).unwrap();
        assert_eq!((b.e0, b.se), (0.0, 0.0));
        let again = baseline_error(&BaselineScheme::Single { model: ModelSpec::new(Algorithm::LogReg) }, &d, 5, 1).unwrap();
        assert_eq!(b, again);
    }
}
