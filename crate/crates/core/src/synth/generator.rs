use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use super::oracle::OracleModel;
use super::rotation::{orthogonal_complement, rotate_to_cosine, RotationSpec};
use crate::dataset::{Dataset, TaskKind};
use crate::error::{Error, Result};
use crate::math::powi;
use crate::rng::{self, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SettingKind {
    Logistic,
    Probit,
    Lda,
    Qda,
    Mixture,
    FourClass,
    LinearRegression,
    NonlinearRegression,
}

impl SettingKind {
    pub const ALL: [SettingKind; 8] = [
        SettingKind::Logistic,
        SettingKind::Probit,
        SettingKind::Lda,
        SettingKind::Mixture,
        SettingKind::Qda,
        SettingKind::FourClass,
        SettingKind::LinearRegression,
        SettingKind::NonlinearRegression,
    ];

    pub fn id(self) -> &'static str {
        match self {
            SettingKind::Logistic => "logistic",
            SettingKind::Probit => "probit",
            SettingKind::Lda => "lda",
            SettingKind::Qda => "qda",
            SettingKind::Mixture => "mixture",
            SettingKind::FourClass => "four-class",
            SettingKind::LinearRegression => "linear-regression",
            SettingKind::NonlinearRegression => "nonlinear-regression",
        }
    }

    pub fn task(self) -> TaskKind {
        match self {
            SettingKind::FourClass => TaskKind::MultiClass(4),
            SettingKind::LinearRegression | SettingKind::NonlinearRegression => TaskKind::Regression,
            _ => TaskKind::Binary,
        }
    }

    /// True when similarity is a mixing weight in [0, 1] rather than a cosine.
    pub fn uses_alpha(self) -> bool {
        matches!(self, SettingKind::Mixture)
    }

    /// -1.0:0.1:1.0 for cosine settings, 0.0:0.1:1.0 for the mixture.
    pub fn default_grid(self) -> Vec<f64> {
        if self.uses_alpha() {
            (0..=10).map(|i| i as f64 / 10.0).collect()
        } else {
            (-10..=10).map(|i| i as f64 / 10.0).collect()
        }
    }

    /// Classes must be exactly balanced, so sample sizes must be even.
    pub fn balanced(self) -> bool {
        matches!(self, SettingKind::Lda | SettingKind::Qda | SettingKind::Mixture)
    }
}

impl fmt::Display for SettingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for SettingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SettingKind::ALL
            .into_iter()
            .find(|k| k.id() == s)
            .ok_or_else(|| Error::invalid(format!("unknown setting '{s}'")))
    }
}

/// One synthetic setting: target parameters plus the similarity knob.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "setting", rename_all = "kebab-case")]
pub enum Setting {
    Logistic { beta_target: Vec<f64>, cosine: f64, ar_rho: f64 },
    Probit { beta_target: Vec<f64>, cosine: f64, noise_var: f64 },
    Lda { mu_target: Vec<f64>, cosine: f64 },
    Qda { mu_target: Vec<f64>, cosine: f64, rho0: f64, rho1: f64 },
    Mixture { mu_target: Vec<f64>, mu_shift: Vec<f64>, alpha: f64 },
    FourClass { beta_target: Vec<f64>, cosine: f64, noise_sd: f64, complement_seed: u64 },
    LinearRegression { beta_target: Vec<f64>, cosine: f64, noise_var: f64 },
    NonlinearRegression { beta_target: Vec<f64>, cosine: f64, noise_var: f64, p: usize },
}

impl Setting {
    /// Draws the per-replicate target parameters of `kind` with default constants.
    ///
    /// Coefficient vectors come from `N(1/4 * 1, 1/16 * I)`; class means are
    /// fixed (`0.3 * 1` or `0.4 * 1`); the mixture shift mean has iid
    /// `N(-0.3, 0.5^2)` entries.
    pub fn draw(kind: SettingKind, similarity: f64, p: usize, rng: &mut Rng) -> Result<Setting> {
        if p < 2 {
            return Err(Error::invalid("settings need p >= 2"));
        }
        let coef = |rng: &mut Rng, len: usize| -> Vec<f64> {
            (0..len).map(|_| 0.25 + 0.25 * rng::normal(rng)).collect()
        };
        let setting = match kind {
            SettingKind::Logistic => Setting::Logistic { beta_target: coef(rng, p), cosine: similarity, ar_rho: 0.5 },
            SettingKind::Probit => Setting::Probit { beta_target: coef(rng, p), cosine: similarity, noise_var: 1.0 },
            SettingKind::Lda => Setting::Lda { mu_target: vec![0.3; p], cosine: similarity },
            SettingKind::Qda => Setting::Qda { mu_target: vec![0.4; p], cosine: similarity, rho0: 0.7, rho1: 0.3 },
            SettingKind::Mixture => Setting::Mixture {
                mu_target: vec![0.3; p],
                mu_shift: (0..p).map(|_| -0.3 + 0.5 * rng::normal(rng)).collect(),
                alpha: similarity,
            },
            SettingKind::FourClass => Setting::FourClass {
                beta_target: coef(rng, p),
                cosine: similarity,
                noise_sd: 0.3,
                complement_seed: rand::RngCore::next_u64(rng),
            },
            SettingKind::LinearRegression => {
                Setting::LinearRegression { beta_target: coef(rng, p), cosine: similarity, noise_var: 1.0 }
            }
            SettingKind::NonlinearRegression => {
                if p < 5 {
                    return Err(Error::invalid("nonlinear regression needs p >= 5"));
                }
                Setting::NonlinearRegression { beta_target: coef(rng, 4), cosine: similarity, noise_var: 1.0, p }
            }
        };
        setting.validate()?;
        Ok(setting)
    }

    pub fn kind(&self) -> SettingKind {
        match self {
            Setting::Logistic { .. } => SettingKind::Logistic,
            Setting::Probit { .. } => SettingKind::Probit,
            Setting::Lda { .. } => SettingKind::Lda,
            Setting::Qda { .. } => SettingKind::Qda,
            Setting::Mixture { .. } => SettingKind::Mixture,
            Setting::FourClass { .. } => SettingKind::FourClass,
            Setting::LinearRegression { .. } => SettingKind::LinearRegression,
            Setting::NonlinearRegression { .. } => SettingKind::NonlinearRegression,
        }
    }

    /// The cosine, or the mixing weight for the mixture setting.
    pub fn similarity(&self) -> f64 {
        match self {
            Setting::Mixture { alpha, .. } => *alpha,
            Setting::Logistic { cosine, .. }
            | Setting::Probit { cosine, .. }
            | Setting::Lda { cosine, .. }
            | Setting::Qda { cosine, .. }
            | Setting::FourClass { cosine, .. }
            | Setting::LinearRegression { cosine, .. }
            | Setting::NonlinearRegression { cosine, .. } => *cosine,
        }
    }

    /// Same target parameters at another similarity level.
    pub fn with_similarity(&self, value: f64) -> Setting {
        let mut out = self.clone();
        match &mut out {
            Setting::Mixture { alpha, .. } => *alpha = value,
            Setting::Logistic { cosine, .. }
            | Setting::Probit { cosine, .. }
            | Setting::Lda { cosine, .. }
            | Setting::Qda { cosine, .. }
            | Setting::FourClass { cosine, .. }
            | Setting::LinearRegression { cosine, .. }
            | Setting::NonlinearRegression { cosine, .. } => *cosine = value,
        }
        out
    }

    pub fn p(&self) -> usize {
        match self {
            Setting::Logistic { beta_target, .. }
            | Setting::Probit { beta_target, .. }
            | Setting::FourClass { beta_target, .. }
            | Setting::LinearRegression { beta_target, .. } => beta_target.len(),
            Setting::Lda { mu_target, .. } | Setting::Qda { mu_target, .. } | Setting::Mixture { mu_target, .. } => {
                mu_target.len()
            }
            Setting::NonlinearRegression { p, .. } => *p,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let sim = self.similarity();
        match self {
            Setting::Mixture { mu_target, mu_shift, alpha } => {
                if !(0.0..=1.0).contains(alpha) {
                    return Err(Error::invalid(format!("mixture alpha {alpha} outside [0, 1]")));
                }
                if mu_target.len() != mu_shift.len() {
                    return Err(Error::DimensionMismatch { expected: mu_target.len(), got: mu_shift.len() });
                }
            }
            Setting::NonlinearRegression { beta_target, p, .. }
                if (beta_target.len() != 4 || *p < 5) => {
                    return Err(Error::invalid("nonlinear regression needs 4 coefficients and p >= 5"));
                }
            _ => {}
        }
        if !self.kind().uses_alpha() && !(sim.abs() <= 1.0 + 1e-12) {
            return Err(Error::invalid(format!("cosine {sim} outside [-1, 1]")));
        }
        match self {
            Setting::Logistic { ar_rho, .. } if !(ar_rho.abs() < 1.0) => {
                Err(Error::invalid("AR correlation must be in (-1, 1)"))
            }
            Setting::Qda { rho0, rho1, .. } if !(rho0.abs() < 1.0 && rho1.abs() < 1.0) => {
                Err(Error::invalid("AR correlation must be in (-1, 1)"))
            }
            Setting::Probit { noise_var, .. }
            | Setting::LinearRegression { noise_var, .. }
            | Setting::NonlinearRegression { noise_var, .. }
                if !(*noise_var >= 0.0) =>
            {
                Err(Error::invalid("noise variance must be >= 0"))
            }
            Setting::FourClass { noise_sd, .. } if !(*noise_sd >= 0.0) => {
                Err(Error::invalid("noise sd must be >= 0"))
            }
            _ => Ok(()),
        }
    }

    /// Parameter vector for `role`: the target vector or its rotation.
    fn rotated(base: &[f64], cosine: f64, role: Role) -> Result<Vec<f64>> {
        match role {
            Role::Target => Ok(base.to_vec()),
            Role::Source => rotate_to_cosine(&RotationSpec { base: base.to_vec(), cosine }),
        }
    }

    /// Resolves the distribution (and Bayes rule) of `role`.
    pub fn oracle(&self, role: Role) -> Result<OracleModel> {
        self.validate()?;
        Ok(match self {
            Setting::Logistic { beta_target, cosine, ar_rho } => {
                OracleModel::logistic(Self::rotated(beta_target, *cosine, role)?, *ar_rho)?
            }
            Setting::Probit { beta_target, cosine, noise_var } => OracleModel::Probit {
                beta: Self::rotated(beta_target, *cosine, role)?,
                noise_var: *noise_var,
            },
            Setting::Lda { mu_target, cosine } => OracleModel::Lda { mu: Self::rotated(mu_target, *cosine, role)? },
            Setting::Qda { mu_target, cosine, rho0, rho1 } => {
                OracleModel::qda(Self::rotated(mu_target, *cosine, role)?, *rho0, *rho1)?
            }
            Setting::Mixture { mu_target, mu_shift, alpha } => OracleModel::Mixture {
                mu_base: mu_target.clone(),
                mu_shift: mu_shift.clone(),
                alpha: if role == Role::Target { 0.0 } else { *alpha },
            },
            Setting::FourClass { beta_target, cosine, noise_sd, complement_seed } => {
                let beta1 = Self::rotated(beta_target, *cosine, role)?;
                let beta2 = orthogonal_complement(&beta1, *complement_seed)?;
                OracleModel::FourClass { beta1, beta2, noise_sd: *noise_sd }
            }
            Setting::LinearRegression { beta_target, cosine, noise_var } => OracleModel::LinearRegression {
                beta: Self::rotated(beta_target, *cosine, role)?,
                noise_var: *noise_var,
            },
            Setting::NonlinearRegression { beta_target, cosine, noise_var, p } => OracleModel::NonlinearRegression {
                beta: Self::rotated(beta_target, *cosine, role)?,
                noise_var: *noise_var,
                p: *p,
            },
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Target,
    Source,
}

/// A setting bound to a role and a default sampling seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    #[serde(flatten)]
    pub setting: Setting,
    pub role: Role,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(setting: Setting, role: Role, seed: u64) -> Self {
        GeneratorSpec { setting, role, seed }
    }

    pub fn oracle(&self) -> Result<OracleModel> {
        self.setting.oracle(self.role)
    }
}

/// `(rho^|r-c|)` correlation matrix, row-major.
pub fn ar_covariance(p: usize, rho: f64) -> Vec<f64> {
    let mut out = vec![0.0; p * p];
    for r in 0..p {
        for c in 0..p {
            out[r * p + c] = powi(rho, (r as i32 - c as i32).abs());
        }
    }
    out
}

/// Draws `n` rows from the distribution of `spec`.
pub fn sample_dataset(spec: &GeneratorSpec, n: usize, seed: u64) -> Result<Dataset> {
    let kind = spec.setting.kind();
    if n < 2 {
        return Err(Error::invalid("need at least 2 samples"));
    }
    if kind.balanced() && !n.is_multiple_of(2) {
        return Err(Error::invalid(format!("{kind} is class balanced and needs an even n, got {n}")));
    }
    let oracle = spec.oracle()?;
    let p = oracle.p();
    let mut rng = rng::seeded(seed);
    let mut x = vec![0.0; n * p];
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let y = oracle.sample_into(&mut rng, i, &mut x[i * p..(i + 1) * p]);
        labels.push(y);
    }
    let names: Vec<String> = (1..=p).map(|j| format!("x{j}")).collect();
    Dataset::new(x, p, labels, kind.task())?.with_column_names(names)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn draw(kind: SettingKind, sim: f64, seed: u64) -> Setting {
        Setting::draw(kind, sim, 10, &mut rng::seeded(seed)).unwrap()
    }

    #[test]
    fn lda_class_means_match_parameters() {
        let spec = GeneratorSpec::new(draw(SettingKind::Lda, 1.0, 1), Role::Source, 0);
        let d = sample_dataset(&spec, 200, 42).unwrap();
        assert_eq!(d.class_counts(), vec![100, 100]);
        for j in 0..10 {
            let m: f64 = (0..200).filter(|i| d.labels()[*i] == 1.0).map(|i| d.row(i)[j]).sum::<f64>() / 100.0;
            assert!((m - 0.3).abs() < 3.0 / 10.0, "coordinate {j}: {m}");
        }
    }

    #[test]
    fn balanced_settings_reject_odd_n() {
        for kind in [SettingKind::Lda, SettingKind::Qda, SettingKind::Mixture] {
            let spec = GeneratorSpec::new(draw(kind, 0.5, 2), Role::Target, 0);
            assert!(sample_dataset(&spec, 201, 1).is_err());
        }
        let bad = Setting::Mixture { mu_target: vec![0.3; 3], mu_shift: vec![0.0; 3], alpha: 1.5 };
        assert!(sample_dataset(&GeneratorSpec::new(bad, Role::Source, 0), 10, 0).is_err());
    }

    #[test]
    fn probit_labels_are_reproducible_and_follow_the_rule() {
        let setting = draw(SettingKind::Probit, 0.3, 3);
        let spec = GeneratorSpec::new(setting.clone(), Role::Source, 0);
        let a = sample_dataset(&spec, 300, 9).unwrap();
        let b = sample_dataset(&spec, 300, 9).unwrap();
        assert_eq!(a, b);
        // regenerate the noise stream by hand: z (p normals) then xi per row
        let beta = match setting.oracle(Role::Source).unwrap() {
            OracleModel::Probit { beta, .. } => beta,
            _ => unreachable!(),
        };
        let mut r = rng::seeded(9);
        for i in 0..300 {
            let z = rng::normals(&mut r, 10);
            let xi = rng::normal(&mut r);
            let lin: f64 = z.iter().zip(&beta).map(|(x, b)| x * b).sum();
            assert_eq!(a.labels()[i], if lin + xi >= 0.0 { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn mixture_alpha_zero_matches_target_distribution() {
        let s = draw(SettingKind::Mixture, 0.0, 4);
        let t = s.oracle(Role::Target).unwrap();
        let src = s.oracle(Role::Source).unwrap();
        let mut r = rng::seeded(1);
        for _ in 0..50 {
            let x = rng::normals(&mut r, 10);
            for y in 0..2 {
                assert_eq!(t.joint_density(&x, y).unwrap(), src.joint_density(&x, y).unwrap());
            }
        }
        let a = sample_dataset(&GeneratorSpec::new(s.clone(), Role::Target, 0), 200, 5).unwrap();
        let b = sample_dataset(&GeneratorSpec::new(s, Role::Source, 0), 200, 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn logistic_features_have_ar_lag_one_correlation() {
        let spec = GeneratorSpec::new(draw(SettingKind::Logistic, 1.0, 5), Role::Target, 0);
        let d = sample_dataset(&spec, 10_000, 77).unwrap();
        let mut num = 0.0;
        let mut den_a = 0.0;
        let mut den_b = 0.0;
        for j in 0..9 {
            for row in d.rows() {
                num += row[j] * row[j + 1];
                den_a += row[j] * row[j];
                den_b += row[j + 1] * row[j + 1];
            }
        }
        let corr = num / (den_a * den_b).sqrt();
        assert!((corr - 0.5).abs() < 0.05, "lag-1 correlation {corr}");
    }

    #[test]
    fn four_class_parameters_are_orthogonal_equal_norm() {
        let s = draw(SettingKind::FourClass, 0.4, 6);
        for role in [Role::Target, Role::Source] {
            match s.oracle(role).unwrap() {
                OracleModel::FourClass { beta1, beta2, .. } => {
                    let dot: f64 = beta1.iter().zip(&beta2).map(|(a, b)| a * b).sum();
                    let n1: f64 = beta1.iter().map(|a| a * a).sum::<f64>().sqrt();
                    let n2: f64 = beta2.iter().map(|a| a * a).sum::<f64>().sqrt();
                    assert!(dot.abs() < 1e-10 && (n1 - n2).abs() < 1e-10);
                }
                _ => unreachable!(),
            }
        }
    }

    #[test]
    fn four_class_noiseless_labels_match_bayes_rule() {
        let s = match draw(SettingKind::FourClass, 0.2, 7) {
            Setting::FourClass { beta_target, cosine, complement_seed, .. } => {
                Setting::FourClass { beta_target, cosine, noise_sd: 0.0, complement_seed }
            }
            _ => unreachable!(),
        };
        let spec = GeneratorSpec::new(s, Role::Source, 0);
        let d = sample_dataset(&spec, 500, 8).unwrap();
        let pred = super::super::bayes_predict(&spec.oracle().unwrap(), &d).unwrap();
        assert_eq!(pred, d.labels());
    }

    #[test]
    fn paired_seeds_keep_probit_features_fixed_across_cosine() {
        let base = draw(SettingKind::Probit, 1.0, 9);
        let a = sample_dataset(&GeneratorSpec::new(base.with_similarity(1.0), Role::Source, 0), 50, 3).unwrap();
        let b = sample_dataset(&GeneratorSpec::new(base.with_similarity(-0.4), Role::Source, 0), 50, 3).unwrap();
        assert_eq!(a.raw(), b.raw());
    }
}
