//! Datasets, task and loss kinds, fold plans.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TaskKind {
    Binary,
    MultiClass(usize),
    Regression,
}

impl TaskKind {
    pub fn is_classification(self) -> bool {
        !matches!(self, TaskKind::Regression)
    }

    /// Number of classes, or `None` for regression.
    pub fn classes(self) -> Option<usize> {
        match self {
            TaskKind::Binary => Some(2),
            TaskKind::MultiClass(k) => Some(k),
            TaskKind::Regression => None,
        }
    }

    /// Task for `k` classes: binary when `k == 2`.
    pub fn classification(k: usize) -> Result<Self> {
        match k {
            2 => Ok(TaskKind::Binary),
            k if k >= 3 => Ok(TaskKind::MultiClass(k)),
            _ => Err(Error::invalid(format!("need at least 2 classes, got {k}"))),
        }
    }

    pub fn default_loss(self) -> LossKind {
        if self.is_classification() {
            LossKind::ZeroOne
        } else {
            LossKind::SquaredError
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TaskKind::Binary => write!(f, "binary"),
            TaskKind::MultiClass(k) => write!(f, "multiclass({k})"),
            TaskKind::Regression => write!(f, "regression"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LossKind {
    ZeroOne,
    SquaredError,
}

impl LossKind {
    pub fn check_task(self, task: TaskKind) -> Result<()> {
        match (self, task.is_classification()) {
            (LossKind::ZeroOne, true) | (LossKind::SquaredError, false) => Ok(()),
            _ => Err(Error::invalid(format!("loss {self:?} is not valid for {task}"))),
        }
    }
}

/// A labeled feature matrix.
///
/// Features are stored row-major (`n` rows of `p` values). Classification
/// labels are dense class ids `0..K` stored as whole-valued floats so that
/// predictions and truth share one representation.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: Vec<f64>,
    n: usize,
    p: usize,
    labels: Vec<f64>,
    task: TaskKind,
    column_names: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(x: Vec<f64>, p: usize, labels: Vec<f64>, task: TaskKind) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidDataset("no feature columns".into()));
        }
        if !x.len().is_multiple_of(p) {
            return Err(Error::InvalidDataset(format!(
                "{} values do not form rows of width {p}",
                x.len()
            )));
        }
        let n = x.len() / p;
        if n == 0 {
            return Err(Error::InvalidDataset("no rows".into()));
        }
        if labels.len() != n {
            return Err(Error::LengthMismatch { left: n, right: labels.len() });
        }
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset(format!(
                "non-finite feature at row {}, column {}",
                i / p,
                i % p
            )));
        }
        if let TaskKind::MultiClass(k) = task {
            if k < 3 {
                return Err(Error::InvalidDataset(format!("MultiClass needs K >= 3, got {k}")));
            }
        }
        match task.classes() {
            Some(k) => {
                for (i, y) in labels.iter().enumerate() {
                    if libm::trunc(*y) != *y || *y < 0.0 || *y >= k as f64 {
                        return Err(Error::InvalidDataset(format!(
                            "label {y} at row {i} is outside 0..{k}"
                        )));
                    }
                }
            }
            None => {
                if let Some(i) = labels.iter().position(|v| !v.is_finite()) {
                    return Err(Error::InvalidDataset(format!("non-finite label at row {i}")));
                }
            }
        }
        Ok(Dataset { x, n, p, labels, task, column_names: None })
    }

    pub fn from_rows(rows: &[Vec<f64>], labels: Vec<f64>, task: TaskKind) -> Result<Self> {
        let p = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != p) {
            return Err(Error::InvalidDataset(format!("row {bad} has a different width")));
        }
        Self::new(rows.concat(), p, labels, task)
    }

    pub fn with_column_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.p {
            return Err(Error::LengthMismatch { left: self.p, right: names.len() });
        }
        self.column_names = Some(names);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn task(&self) -> TaskKind {
        self.task
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn column_names(&self) -> Option<&[String]> {
        self.column_names.as_deref()
    }

    /// Row-major feature values.
    pub fn raw(&self) -> &[f64] {
        &self.x
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.p..(i + 1) * self.p]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.x.chunks_exact(self.p)
    }

    /// Feature matrix as an `n x p` nalgebra matrix.
    pub fn features(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n, self.p, &self.x)
    }

    pub fn class_ids(&self) -> Vec<usize> {
        self.labels.iter().map(|y| *y as usize).collect()
    }

    /// Per-class counts; empty for regression.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.task.classes().unwrap_or(0)];
        if self.task.is_classification() {
            for y in &self.labels {
                counts[*y as usize] += 1;
            }
        }
        counts
    }

    pub fn subset(&self, idx: &[usize]) -> Result<Self> {
        let mut x = Vec::with_capacity(idx.len() * self.p);
        let mut labels = Vec::with_capacity(idx.len());
        for &i in idx {
            x.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        let mut out = Dataset::new(x, self.p, labels, self.task)?;
        out.column_names = self.column_names.clone();
        Ok(out)
    }

    /// Row concatenation of `self` followed by `other`.
    pub fn concat(&self, other: &Dataset) -> Result<Self> {
        self.check_compatible(other)?;
        let mut x = self.x.clone();
        x.extend_from_slice(&other.x);
        let mut labels = self.labels.clone();
        labels.extend_from_slice(&other.labels);
        let mut out = Dataset::new(x, self.p, labels, self.task)?;
        out.column_names = self.column_names.clone();
        Ok(out)
    }

    /// Same rows with a replacement label vector.
    pub fn with_labels(&self, labels: Vec<f64>) -> Result<Self> {
        let mut out = Dataset::new(self.x.clone(), self.p, labels, self.task)?;
        out.column_names = self.column_names.clone();
        Ok(out)
    }

    /// Same rows with replacement features (width may differ).
    pub fn with_features(&self, x: Vec<f64>, p: usize) -> Result<Self> {
        Dataset::new(x, p, self.labels.clone(), self.task)
    }

    pub fn check_compatible(&self, other: &Dataset) -> Result<()> {
        if self.p != other.p {
            return Err(Error::DimensionMismatch { expected: self.p, got: other.p });
        }
        if self.task != other.task {
            return Err(Error::invalid(format!(
                "task mismatch: {} vs {}",
                self.task, other.task
            )));
        }
        Ok(())
    }
}

/// Assignment of rows to `k` cross-validation folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub assignments: Vec<usize>,
    pub seed: u64,
    /// False when stratification was requested but a class had fewer than `k` rows.
    pub stratified: bool,
    pub fell_back: bool,
}

impl FoldPlan {
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len()).filter(|i| self.assignments[*i] == fold).collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len()).filter(|i| self.assignments[*i] != fold).collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for a in &self.assignments {
            sizes[*a] += 1;
        }
        sizes
    }
}

/// Builds a seeded `k`-fold plan, stratified per class for classification.
///
/// Rows are shuffled within each class, the classes are laid end to end and
/// position `t` goes to fold `t mod k`. Fold sizes therefore differ by at most
/// one overall and per class.
pub fn make_folds(data: &Dataset, k: usize, seed: u64) -> Result<FoldPlan> {
    let n = data.n();
    if k < 2 || k > n {
        return Err(Error::invalid(format!("fold count {k} must be in 2..={n}")));
    }
    let mut rng = rng::stream(seed, 0xF01D);
    let counts = data.class_counts();
    let stratify = data.task().is_classification();
    let fell_back = stratify && counts.iter().any(|c| *c > 0 && *c < k);
    let mut order: Vec<usize> = Vec::with_capacity(n);
    if stratify && !fell_back {
        let ids = data.class_ids();
        for class in 0..counts.len() {
            let mut members: Vec<usize> = (0..n).filter(|i| ids[*i] == class).collect();
            rng::shuffle(&mut rng, &mut members);
            order.extend(members);
        }
    } else {
        order.extend(0..n);
        rng::shuffle(&mut rng, &mut order);
    }
    let mut assignments = vec![0; n];
    for (t, i) in order.into_iter().enumerate() {
        assignments[i] = t % k;
    }
    Ok(FoldPlan { k, assignments, seed, stratified: stratify && !fell_back, fell_back })
}

/// Average loss of `predictions` against `truth`.
pub fn mean_loss(predictions: &[f64], truth: &[f64], loss: LossKind) -> Result<f64> {
    if predictions.len() != truth.len() {
        return Err(Error::LengthMismatch { left: predictions.len(), right: truth.len() });
    }
    if predictions.is_empty() {
        return Err(Error::invalid("mean_loss of empty vectors"));
    }
    if let Some(i) = predictions.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("prediction at index {i}")));
    }
    let total: f64 = match loss {
        LossKind::ZeroOne => predictions
            .iter()
            .zip(truth)
            .filter(|(a, b)| a != b)
            .count() as f64,
        LossKind::SquaredError => predictions.iter().zip(truth).map(|(a, b)| (a - b) * (a - b)).sum(),
    };
    Ok(total / predictions.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toy(n: usize, task: TaskKind) -> Dataset {
        let x: Vec<f64> = (0..n * 2).map(|v| v as f64).collect();
        let labels = (0..n)
            .map(|i| match task {
                TaskKind::Regression => i as f64 * 0.5,
                _ => (i % task.classes().unwrap()) as f64,
            })
            .collect();
        Dataset::new(x, 2, labels, task).unwrap()
    }

    #[test]
    fn rejects_bad_labels_and_values() {
        assert!(Dataset::new(vec![0.0, 1.0], 1, vec![0.0, 2.0], TaskKind::Binary).is_err());
        assert!(Dataset::new(vec![0.0, f64::NAN], 1, vec![0.0, 1.0], TaskKind::Binary).is_err());
        assert!(Dataset::new(vec![0.0, 1.0], 1, vec![0.0, 0.5], TaskKind::Binary).is_err());
        assert!(Dataset::new(vec![], 1, vec![], TaskKind::Binary).is_err());
        assert!(Dataset::new(vec![0.0], 1, vec![0.0], TaskKind::MultiClass(2)).is_err());
    }

    #[test]
    fn ten_rows_five_folds_of_two() {
        let d = toy(10, TaskKind::Regression);
        let plan = make_folds(&d, 5, 3).unwrap();
        assert_eq!(plan.fold_sizes(), vec![2; 5]);
        assert_eq!(plan, make_folds(&d, 5, 3).unwrap());
    }

    #[test]
    fn balanced_binary_folds_are_stratified() {
        let d = toy(200, TaskKind::Binary);
        let plan = make_folds(&d, 5, 11).unwrap();
        assert!(plan.stratified);
        for f in 0..5 {
            let test = plan.test_indices(f);
            let ones = test.iter().filter(|i| d.labels()[**i] == 1.0).count();
            assert_eq!(test.len(), 40);
            assert_eq!(ones, 20);
        }
    }

    #[test]
    fn sparse_class_falls_back() {
        let labels = vec![0.0, 0.0, 0.0, 0.0, 0.0, 1.0];
        let d = Dataset::new((0..6).map(f64::from).collect(), 1, labels, TaskKind::Binary).unwrap();
        let plan = make_folds(&d, 3, 0).unwrap();
        assert!(plan.fell_back && !plan.stratified);
        assert!(make_folds(&d, 7, 0).is_err());
    }

    #[test]
    fn mean_loss_examples() {
        assert_eq!(mean_loss(&[0.0, 1.0], &[0.0, 1.0], LossKind::ZeroOne).unwrap(), 0.0);
        assert_eq!(mean_loss(&[1.0, 0.0], &[0.0, 1.0], LossKind::ZeroOne).unwrap(), 1.0);
        assert_eq!(mean_loss(&[1.0, 2.0], &[0.0, 0.0], LossKind::SquaredError).unwrap(), 2.5);
        assert!(mean_loss(&[1.0], &[0.0, 0.0], LossKind::ZeroOne).is_err());
        assert!(mean_loss(&[f64::NAN], &[0.0], LossKind::SquaredError).is_err());
    }

    proptest! {
        #[test]
        fn fold_plan_is_partition(n in 2usize..120, k in 2usize..10, seed in any::<u64>(), binary in any::<bool>()) {
            prop_assume!(k <= n);
            let d = toy(n, if binary { TaskKind::Binary } else { TaskKind::Regression });
            let plan = make_folds(&d, k, seed).unwrap();
            let sizes = plan.fold_sizes();
            prop_assert_eq!(sizes.iter().sum::<usize>(), n);
            prop_assert!(sizes.iter().all(|s| *s >= 1));
            let (lo, hi) = (sizes.iter().min().unwrap(), sizes.iter().max().unwrap());
            prop_assert!(hi - lo <= 1);
        }

        #[test]
        fn zero_one_loss_in_unit_interval(pairs in proptest::collection::vec((0u8..3, 0u8..3), 1..50)) {
            let (p, t): (Vec<f64>, Vec<f64>) = pairs.iter().map(|(a, b)| (*a as f64, *b as f64)).unzip();
            let l = mean_loss(&p, &t, LossKind::ZeroOne).unwrap();
            prop_assert!((0.0..=1.0).contains(&l));
        }
    }
}
