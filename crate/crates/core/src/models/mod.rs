//! Learners used inside the score estimators, plus cross-validated error.
//!
//! Every learner is written against flat row-major features. Classification
//! learners see dense local class ids `0..m` over the classes present in their
//! training data; [`FittedModel`] maps predictions back to the dataset's ids.

pub mod discriminant;
pub mod gbt;
pub mod linear;
pub mod ols;
pub mod svm;

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{mean_loss, Dataset, FoldPlan, LossKind, TaskKind};
use crate::error::{Error, Result};
use crate::math::{self, sqrt};
use crate::rng;

use self::discriminant::Discriminant;
use self::gbt::{Booster, GbtClassifier, Objective};
use self::linear::{BinaryGlm, Link, Multinomial};
use self::ols::Ols;
use self::svm::{Kernel, Svc, Svr};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "logreg")]
    LogReg,
    #[serde(rename = "multinom")]
    MultinomLogReg,
    #[serde(rename = "probit")]
    Probit,
    #[serde(rename = "lda")]
    Lda,
    #[serde(rename = "qda")]
    Qda,
    #[serde(rename = "svm-linear")]
    SvmLinear,
    #[serde(rename = "svm-rbf")]
    SvmRbf,
    #[serde(rename = "svr-linear")]
    SvrLinear,
    #[serde(rename = "svr-rbf")]
    SvrRbf,
    #[serde(rename = "gbt")]
    Gbt,
    #[serde(rename = "ols")]
    Ols,
}

impl Algorithm {
    pub const ALL: [Algorithm; 11] = [
        Algorithm::LogReg,
        Algorithm::MultinomLogReg,
        Algorithm::Probit,
        Algorithm::Lda,
        Algorithm::Qda,
        Algorithm::SvmLinear,
        Algorithm::SvmRbf,
        Algorithm::SvrLinear,
        Algorithm::SvrRbf,
        Algorithm::Gbt,
        Algorithm::Ols,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Algorithm::LogReg => "logreg",
            Algorithm::MultinomLogReg => "multinom",
            Algorithm::Probit => "probit",
            Algorithm::Lda => "lda",
            Algorithm::Qda => "qda",
            Algorithm::SvmLinear => "svm-linear",
            Algorithm::SvmRbf => "svm-rbf",
            Algorithm::SvrLinear => "svr-linear",
            Algorithm::SvrRbf => "svr-rbf",
            Algorithm::Gbt => "gbt",
            Algorithm::Ols => "ols",
        }
    }

    pub fn supports(self, task: TaskKind) -> bool {
        match self {
            Algorithm::LogReg | Algorithm::Probit => task == TaskKind::Binary,
            Algorithm::MultinomLogReg | Algorithm::Lda | Algorithm::Qda | Algorithm::SvmLinear | Algorithm::SvmRbf => {
                task.is_classification()
            }
            Algorithm::SvrLinear | Algorithm::SvrRbf | Algorithm::Ols => task == TaskKind::Regression,
            Algorithm::Gbt => true,
        }
    }

    /// The closest algorithm of the same family that supports `task`: logistic
    /// regression becomes softmax or least squares, classifiers become their
    /// regression counterparts and back.
    pub fn adapted_to(self, task: TaskKind) -> Option<Algorithm> {
        if self.supports(task) {
            return Some(self);
        }
        let alt = match (self, task) {
            (Algorithm::LogReg | Algorithm::Probit | Algorithm::Ols, TaskKind::MultiClass(_)) => Algorithm::MultinomLogReg,
            (Algorithm::LogReg | Algorithm::Probit | Algorithm::MultinomLogReg | Algorithm::Lda | Algorithm::Qda, TaskKind::Regression) => {
                Algorithm::Ols
            }
            (Algorithm::Ols, TaskKind::Binary) => Algorithm::LogReg,
            (Algorithm::SvmLinear, TaskKind::Regression) => Algorithm::SvrLinear,
            (Algorithm::SvmRbf, TaskKind::Regression) => Algorithm::SvrRbf,
            (Algorithm::SvrLinear, _) => Algorithm::SvmLinear,
            (Algorithm::SvrRbf, _) => Algorithm::SvmRbf,
            _ => return None,
        };
        alt.supports(task).then_some(alt)
    }

    /// Models natively supporting row weights; the others fall back to
    /// weighted resampling in [`fit_weighted`].
    pub fn native_weights(self) -> bool {
        matches!(self, Algorithm::LogReg | Algorithm::MultinomLogReg | Algorithm::Probit | Algorithm::Gbt | Algorithm::Ols)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.id() == s.trim())
            .ok_or_else(|| Error::invalid(format!("unknown model id '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Hyperparams {
    /// Box constraint for SVM and SVR.
    pub c: f64,
    /// RBF width; `None` means `1 / (p · mean feature variance)` of the training data.
    pub gamma: Option<f64>,
    /// SVR tube half-width.
    pub epsilon: f64,
    pub rounds: usize,
    pub depth: usize,
    pub learning_rate: f64,
    /// Newton iterations for the GLMs.
    pub max_iter: usize,
    pub tol: f64,
    /// Ridge on non-intercept GLM coefficients.
    pub l2: f64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            c: 1.0,
            gamma: None,
            epsilon: 0.1,
            rounds: 100,
            depth: 3,
            learning_rate: 0.1,
            max_iter: 100,
            tol: 1e-8,
            l2: 0.0,
        }
    }
}

/// SMO stopping tolerance on the maximal KKT violation.
pub const SMO_EPS: f64 = 1e-3;
/// SMO is capped at this many passes (`passes · l` pair updates).
pub const SMO_PASSES: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub algorithm: Algorithm,
    #[serde(flatten)]
    pub hyper: Hyperparams,
}

impl ModelSpec {
    pub fn new(algorithm: Algorithm) -> Self {
        ModelSpec { algorithm, hyper: Hyperparams::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let h = &self.hyper;
        let positive = [("c", h.c), ("learning_rate", h.learning_rate), ("tol", h.tol)];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if let Some(g) = h.gamma {
            if !(g > 0.0 && g.is_finite()) {
                return Err(Error::invalid(format!("gamma must be positive, got {g}")));
            }
        }
        if !(h.epsilon >= 0.0) || !(h.l2 >= 0.0) {
            return Err(Error::invalid("epsilon and l2 must be non-negative"));
        }
        if h.rounds == 0 || h.depth == 0 || h.max_iter == 0 {
            return Err(Error::invalid("rounds, depth and max_iter must be at least 1"));
        }
        Ok(())
    }

    /// Same spec with the algorithm swapped for one supporting `task`.
    pub fn adapted_to(&self, task: TaskKind) -> Result<ModelSpec> {
        let algorithm = self
            .algorithm
            .adapted_to(task)
            .ok_or(Error::IncompatibleTask { algorithm: self.algorithm.id().into(), task: format!("{task}") })?;
        Ok(ModelSpec { algorithm, hyper: self.hyper.clone() })
    }

    /// Parses a comma separated id list such as `logreg,svm-linear,svm-rbf,gbt`.
    pub fn parse_list(list: &str) -> Result<Vec<ModelSpec>> {
        let specs: Vec<ModelSpec> = list
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| s.parse().map(ModelSpec::new))
            .collect::<Result<_>>()?;
        if specs.is_empty() {
            return Err(Error::invalid("empty model list"));
        }
        Ok(specs)
    }

    /// Logistic regression (or its task counterpart), linear SVM, RBF SVM and boosting.
    pub fn default_set(task: TaskKind) -> Vec<ModelSpec> {
        let ids: [Algorithm; 4] = match task {
            TaskKind::Binary => [Algorithm::LogReg, Algorithm::SvmLinear, Algorithm::SvmRbf, Algorithm::Gbt],
            TaskKind::MultiClass(_) => [Algorithm::MultinomLogReg, Algorithm::SvmLinear, Algorithm::SvmRbf, Algorithm::Gbt],
            TaskKind::Regression => [Algorithm::Ols, Algorithm::SvrLinear, Algorithm::SvrRbf, Algorithm::Gbt],
        };
        ids.into_iter().map(ModelSpec::new).collect()
    }
}

impl From<Algorithm> for ModelSpec {
    fn from(a: Algorithm) -> Self {
        ModelSpec::new(a)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainingSummary {
    pub iterations: usize,
    /// Objective history of the solver; the first sub-problem for one-vs-rest fits.
    pub objective: Vec<f64>,
    pub final_objective: Option<f64>,
    pub converged: bool,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
enum Inner {
    Constant(usize),
    Glm(BinaryGlm),
    Multinomial(Multinomial),
    Discriminant(Discriminant),
    Svc(Svc),
    Svr(Svr),
    GbtClassifier(GbtClassifier),
    GbtRegressor(Booster),
    Ols(Ols),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FittedModel {
    pub algorithm: Algorithm,
    p: usize,
    task: TaskKind,
    /// Original ids of the local classes.
    classes: Vec<usize>,
    inner: Inner,
    pub summary: TrainingSummary,
}

impl FittedModel {
    pub fn p(&self) -> usize {
        self.p
    }

    pub fn task(&self) -> TaskKind {
        self.task
    }

    /// Class ids seen in training.
    pub fn classes(&self) -> &[usize] {
        &self.classes
    }

    /// Estimated class means for LDA and QDA, in the order of [`Self::classes`].
    pub fn class_means(&self) -> Option<&[Vec<f64>]> {
        match &self.inner {
            Inner::Discriminant(d) => Some(&d.means),
            _ => None,
        }
    }

    pub fn svc(&self) -> Option<&Svc> {
        match &self.inner {
            Inner::Svc(s) => Some(s),
            _ => None,
        }
    }

    pub fn glm(&self) -> Option<&BinaryGlm> {
        match &self.inner {
            Inner::Glm(g) => Some(g),
            _ => None,
        }
    }

    /// Prediction for one row; class ids for classification.
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let local = match &self.inner {
            Inner::Constant(c) => *c,
            Inner::Glm(m) => m.predict_row(row),
            Inner::Multinomial(m) => m.predict_row(row),
            Inner::Discriminant(m) => m.predict_row(row),
            Inner::Svc(m) => m.predict_row(row),
            Inner::GbtClassifier(m) => m.predict_row(row),
            Inner::Svr(m) => return m.predict_row(row),
            Inner::GbtRegressor(m) => return m.raw(row),
            Inner::Ols(m) => return m.predict_row(row),
        };
        self.classes[local] as f64
    }

    /// Predictions for row-major features of width `p`.
    pub fn predict_rows(&self, x: &[f64]) -> Result<Vec<f64>> {
        if !x.len().is_multiple_of(self.p) {
            return Err(Error::DimensionMismatch { expected: self.p, got: x.len() });
        }
        let out: Vec<f64> = x.chunks_exact(self.p).map(|r| self.predict_row(r)).collect();
        if let Some(i) = out.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("prediction for row {i}")));
        }
        Ok(out)
    }

    pub fn predict(&self, data: &Dataset) -> Result<Vec<f64>> {
        if data.p() != self.p {
            return Err(Error::DimensionMismatch { expected: self.p, got: data.p() });
        }
        self.predict_rows(data.raw())
    }
}

/// Fits `spec` to `data` with unit row weights.
pub fn fit(spec: &ModelSpec, data: &Dataset) -> Result<FittedModel> {
    let w = vec![1.0; data.n()];
    fit_inner(spec, data, &w)
}

/// Fits with row weights. Algorithms without native weights are trained on a
/// seeded weighted resample of the same size.
pub fn fit_weighted(spec: &ModelSpec, data: &Dataset, weights: &[f64], seed: u64) -> Result<FittedModel> {
    if weights.len() != data.n() {
        return Err(Error::LengthMismatch { left: data.n(), right: weights.len() });
    }
    if weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) || !(weights.iter().sum::<f64>() > 0.0) {
        return Err(Error::invalid("weights must be finite, non-negative and not all zero"));
    }
    if spec.algorithm.native_weights() {
        return fit_inner(spec, data, weights);
    }
    let mut r = rng::stream(seed, 0x5EED_A11C);
    let idx = rng::weighted_indices(&mut r, weights, data.n());
    fit(spec, &data.subset(&idx)?)
}

fn fit_inner(spec: &ModelSpec, data: &Dataset, w: &[f64]) -> Result<FittedModel> {
    spec.validate()?;
    let task = data.task();
    if !spec.algorithm.supports(task) {
        return Err(Error::IncompatibleTask { algorithm: spec.algorithm.id().into(), task: format!("{task}") });
    }
    if data.n() < 2 {
        return Err(Error::invalid(format!("need at least 2 rows to fit, got {}", data.n())));
    }
    let (x, p, h) = (data.raw(), data.p(), &spec.hyper);
    let mut summary = TrainingSummary::default();

    if !task.is_classification() {
        let y = data.labels();
        let inner = match spec.algorithm {
            Algorithm::Ols => Inner::Ols(Ols::fit(x, p, y, w)?),
            Algorithm::SvrLinear | Algorithm::SvrRbf => {
                let kernel = kernel_for(spec, x, p);
                let (m, s) = Svr::fit(x, p, y, kernel, h.c, h.epsilon, SMO_EPS, SMO_PASSES);
                record_smo(&mut summary, &[s]);
                Inner::Svr(m)
            }
            Algorithm::Gbt => {
                let (b, s) = Booster::fit(Objective::Squared, x, p, y, w, h.rounds, h.depth, h.learning_rate);
                record_boost(&mut summary, &[s], h.rounds);
                Inner::GbtRegressor(b)
            }
            _ => unreachable!("task support checked above"),
        };
        if matches!(inner, Inner::Ols(_)) {
            summary.converged = true;
        }
        return Ok(FittedModel { algorithm: spec.algorithm, p, task, classes: Vec::new(), inner, summary });
    }

    let ids = data.class_ids();
    let counts = data.class_counts();
    let classes: Vec<usize> = (0..counts.len()).filter(|c| counts[*c] > 0).collect();
    let mut local_of = vec![usize::MAX; counts.len()];
    for (l, c) in classes.iter().enumerate() {
        local_of[*c] = l;
    }
    let y: Vec<usize> = ids.iter().map(|c| local_of[*c]).collect();
    let k = classes.len();
    if k == 1 {
        summary.converged = true;
        summary.warnings.push(format!("only class {} present; predicting it everywhere", classes[0]));
        return Ok(FittedModel { algorithm: spec.algorithm, p, task, classes, inner: Inner::Constant(0), summary });
    }
    let inner = match spec.algorithm {
        Algorithm::LogReg | Algorithm::Probit if k == 2 => {
            let link = if spec.algorithm == Algorithm::Probit { Link::Probit } else { Link::Logit };
            let yb: Vec<f64> = y.iter().map(|v| *v as f64).collect();
            let (m, out) = BinaryGlm::fit(link, x, p, &yb, w, h.l2, h.max_iter, h.tol)?;
            record_newton(&mut summary, out);
            Inner::Glm(m)
        }
        Algorithm::MultinomLogReg => {
            let (m, out) = Multinomial::fit(x, p, &y, w, k, h.l2, h.max_iter, h.tol)?;
            record_newton(&mut summary, out);
            Inner::Multinomial(m)
        }
        Algorithm::Lda | Algorithm::Qda => {
            let (m, warnings) = Discriminant::fit(x, p, &y, w, k, spec.algorithm == Algorithm::Qda)?;
            summary.converged = true;
            summary.warnings = warnings;
            Inner::Discriminant(m)
        }
        Algorithm::SvmLinear | Algorithm::SvmRbf => {
            let kernel = kernel_for(spec, x, p);
            let (m, stats) = Svc::fit(x, p, &y, k, kernel, h.c, SMO_EPS, SMO_PASSES);
            record_smo(&mut summary, &stats);
            Inner::Svc(m)
        }
        Algorithm::Gbt => {
            let (m, stats) = GbtClassifier::fit(x, p, &y, w, k, h.rounds, h.depth, h.learning_rate);
            record_boost(&mut summary, &stats, h.rounds);
            Inner::GbtClassifier(m)
        }
        Algorithm::LogReg | Algorithm::Probit => {
            return Err(Error::IncompatibleTask { algorithm: spec.algorithm.id().into(), task: format!("{k} classes") });
        }
        Algorithm::SvrLinear | Algorithm::SvrRbf | Algorithm::Ols => unreachable!("task support checked above"),
    };
    Ok(FittedModel { algorithm: spec.algorithm, p, task, classes, inner, summary })
}

/// `gamma`, or `1 / (p · mean column variance)` when unset.
pub fn default_gamma(x: &[f64], p: usize) -> f64 {
    let n = (x.len() / p) as f64;
    let mut total = 0.0;
    for j in 0..p {
        let m = x.iter().skip(j).step_by(p).sum::<f64>() / n;
        total += x.iter().skip(j).step_by(p).map(|v| (v - m) * (v - m)).sum::<f64>() / n;
    }
    let mean_var = total / p as f64;
    if mean_var > 0.0 {
        1.0 / (p as f64 * mean_var)
    } else {
        1.0
    }
}

fn kernel_for(spec: &ModelSpec, x: &[f64], p: usize) -> Kernel {
    match spec.algorithm {
        Algorithm::SvmRbf | Algorithm::SvrRbf => Kernel::Rbf { gamma: spec.hyper.gamma.unwrap_or_else(|| default_gamma(x, p)) },
        _ => Kernel::Linear,
    }
}

fn record_newton(summary: &mut TrainingSummary, out: linear::NewtonOutcome) {
    summary.iterations = out.iterations;
    summary.final_objective = out.objective.last().copied();
    summary.objective = out.objective;
    summary.converged = out.converged;
    if !out.converged {
        summary.warnings.push(format!("gradient norm {:.3e} above tolerance after {} iterations", out.grad_inf, out.iterations));
    }
}

fn record_smo(summary: &mut TrainingSummary, stats: &[svm::SolverStats]) {
    summary.iterations = stats.iter().map(|s| s.iterations).sum();
    summary.converged = stats.iter().all(|s| s.converged);
    summary.objective = stats[0].objective.clone();
    summary.final_objective = Some(stats.iter().filter_map(|s| s.objective.last()).sum());
    if !summary.converged {
        summary.warnings.push("SMO stopped at the iteration cap".into());
    }
}

fn record_boost(summary: &mut TrainingSummary, stats: &[gbt::BoostStats], rounds: usize) {
    summary.iterations = rounds;
    summary.converged = true;
    summary.objective = stats[0].objective.clone();
    summary.final_objective = Some(stats.iter().filter_map(|s| s.objective.last()).sum());
}

/// Cross-validated loss.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub mean: f64,
    /// Standard deviation of the fold losses over the square root of the fold count.
    pub se: f64,
    pub fold_losses: Vec<f64>,
    /// Folds whose training part lacked a class present in the full data.
    pub skipped: Vec<usize>,
    /// Held-out prediction per row; `None` for rows in skipped folds.
    pub oof: Vec<Option<f64>>,
}

/// Fold loss mean and standard error from the held-out part of each fold.
pub fn cv_error(spec: &ModelSpec, data: &Dataset, folds: &FoldPlan, loss: LossKind) -> Result<CvResult> {
    if folds.assignments.len() != data.n() {
        return Err(Error::LengthMismatch { left: data.n(), right: folds.assignments.len() });
    }
    loss.check_task(data.task())?;
    let present = data.class_counts();
    let mut fold_losses = Vec::with_capacity(folds.k);
    let mut skipped = Vec::new();
    let mut oof = vec![None; data.n()];
    for fold in 0..folds.k {
        let test = folds.test_indices(fold);
        if test.is_empty() {
            skipped.push(fold);
            continue;
        }
        let train = folds.train_indices(fold);
        let train_set = data.subset(&train)?;
        if data.task().is_classification() {
            let seen = train_set.class_counts();
            let missing = present.iter().enumerate().any(|(c, n)| *n > 0 && seen.get(c).is_none_or(|s| *s == 0));
            if missing {
                skipped.push(fold);
                continue;
            }
        }
        let model = fit(spec, &train_set)?;
        let test_set = data.subset(&test)?;
        let pred = model.predict(&test_set)?;
        fold_losses.push(mean_loss(&pred, test_set.labels(), loss)?);
        for (i, v) in test.iter().zip(pred) {
            oof[*i] = Some(v);
        }
    }
    if fold_losses.is_empty() {
        return Err(Error::invalid("every cross-validation fold was skipped"));
    }
    let (mean, se) = mean_and_se(&fold_losses);
    Ok(CvResult { mean, se, fold_losses, skipped, oof })
}

/// Mean of fold losses and `sd / sqrt(k)`.
pub fn mean_and_se(fold_losses: &[f64]) -> (f64, f64) {
    let k = fold_losses.len() as f64;
    (math::mean(fold_losses), math::sample_sd(fold_losses) / sqrt(k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::make_folds;

    fn separable() -> Dataset {
        Dataset::from_rows(
            &[vec![0.0, 0.0], vec![0.0, 1.0], vec![3.0, 3.0], vec![3.0, 4.0]],
            vec![0.0, 0.0, 1.0, 1.0],
            TaskKind::Binary,
        )
        .unwrap()
    }

    #[test]
    fn ids_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.id().parse::<Algorithm>().unwrap(), a);
        }
        let specs = ModelSpec::parse_list("logreg,svm-linear,svm-rbf,gbt").unwrap();
        assert_eq!(specs, ModelSpec::default_set(TaskKind::Binary));
        assert!(ModelSpec::parse_list("logreg,forest").is_err());
    }

    #[test]
    fn logreg_separates_four_points() {
        let d = separable();
        let m = fit(&ModelSpec::new(Algorithm::LogReg), &d).unwrap();
        assert_eq!(m.predict(&d).unwrap(), d.labels());
        assert!(m.summary.objective.windows(2).all(|w| w[1] <= w[0] + 1e-9));
    }

    #[test]
    fn incompatible_task_is_rejected() {
        let d = separable();
        assert!(matches!(fit(&ModelSpec::new(Algorithm::Ols), &d), Err(Error::IncompatibleTask { .. })));
        assert_eq!(Algorithm::Ols.adapted_to(TaskKind::Binary), Some(Algorithm::LogReg));
        assert_eq!(Algorithm::SvmRbf.adapted_to(TaskKind::Regression), Some(Algorithm::SvrRbf));
    }

    #[test]
    fn dimension_mismatch_on_predict() {
        let d = separable();
        let m = fit(&ModelSpec::new(Algorithm::Lda), &d).unwrap();
        let wide = Dataset::from_rows(&[vec![0.0, 0.0, 0.0]], vec![0.0], TaskKind::Binary).unwrap();
        assert!(matches!(m.predict(&wide), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn constant_labels_give_zero_cv_error() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let d = Dataset::from_rows(&rows, vec![1.0; 10], TaskKind::Binary).unwrap();
        let folds = make_folds(&d, 5, 3).unwrap();
        for a in [Algorithm::LogReg, Algorithm::SvmRbf, Algorithm::Gbt] {
            let cv = cv_error(&ModelSpec::new(a), &d, &folds, LossKind::ZeroOne).unwrap();
            assert_eq!((cv.mean, cv.se), (0.0, 0.0));
        }
    }

    #[test]
    fn invalid_hyperparameters_are_rejected() {
        let mut s = ModelSpec::new(Algorithm::SvmRbf);
        s.hyper.c = 0.0;
        assert!(s.validate().is_err());
        s.hyper.c = 1.0;
        s.hyper.gamma = Some(-1.0);
        assert!(s.validate().is_err());
    }
}
