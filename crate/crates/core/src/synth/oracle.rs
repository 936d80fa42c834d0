use alloc::vec;
use alloc::vec::Vec;

use super::generator::ar_covariance;
use crate::dataset::{Dataset, TaskKind};
use crate::error::{Error, Result};
use crate::linalg::{cholesky_lower, log_det_lower, lower_mul, lower_solve_sq};
use crate::math::{self, dot, exp, ln, norm_cdf, sigmoid, sin, sqrt};
use crate::rng::{self, Rng};

/// Resolved data distribution of one role, with its exact Bayes rule.
///
/// Binary labels use class 1 for the `+mu` component and class 0 for `-mu`.
#[derive(Debug, Clone, PartialEq)]
pub enum OracleModel {
    /// `x ~ N(0, chol * chol')`, `P(y = 1 | x) = sigmoid(beta'x)`.
    Logistic { beta: Vec<f64>, chol: Vec<f64> },
    /// `x ~ N(0, I)`, `y = 1[beta'x + xi >= 0]`, `xi ~ N(0, noise_var)`.
    Probit { beta: Vec<f64>, noise_var: f64 },
    /// Balanced `N(+-mu, I)`.
    Lda { mu: Vec<f64> },
    /// Balanced `N(+-mu, Sigma_l)` with class-specific Cholesky factors.
    Qda { mu: Vec<f64>, chol: [Vec<f64>; 2] },
    /// Balanced; each class mixes `(1 - alpha) N(+-mu_base, I) + alpha N(+-mu_shift, I)`.
    Mixture { mu_base: Vec<f64>, mu_shift: Vec<f64>, alpha: f64 },
    /// `x ~ N(0, I)`, label from the signs of two noisy projections.
    FourClass { beta1: Vec<f64>, beta2: Vec<f64>, noise_sd: f64 },
    LinearRegression { beta: Vec<f64>, noise_var: f64 },
    /// `y = b1 sin x1 + b2 x2^2 + b3 x3 x4 + b4 exp(x5) + eps`.
    NonlinearRegression { beta: Vec<f64>, noise_var: f64, p: usize },
}

/// Unnormalised isotropic Gaussian density `exp(-||x - s*m||^2 / 2)`.
fn iso_kernel(x: &[f64], m: &[f64], sign: f64) -> f64 {
    let d2: f64 = x.iter().zip(m).map(|(a, b)| (a - sign * b) * (a - sign * b)).sum();
    exp(-0.5 * d2)
}

impl OracleModel {
    pub fn logistic(beta: Vec<f64>, ar_rho: f64) -> Result<Self> {
        let p = beta.len();
        let chol = cholesky_lower(&ar_covariance(p, ar_rho), p)?;
        Ok(OracleModel::Logistic { beta, chol })
    }

    pub fn qda(mu: Vec<f64>, rho0: f64, rho1: f64) -> Result<Self> {
        let p = mu.len();
        let chol = [cholesky_lower(&ar_covariance(p, rho0), p)?, cholesky_lower(&ar_covariance(p, rho1), p)?];
        Ok(OracleModel::Qda { mu, chol })
    }

    pub fn p(&self) -> usize {
        match self {
            OracleModel::Logistic { beta, .. }
            | OracleModel::Probit { beta, .. }
            | OracleModel::LinearRegression { beta, .. } => beta.len(),
            OracleModel::Lda { mu } | OracleModel::Qda { mu, .. } => mu.len(),
            OracleModel::Mixture { mu_base, .. } => mu_base.len(),
            OracleModel::FourClass { beta1, .. } => beta1.len(),
            OracleModel::NonlinearRegression { p, .. } => *p,
        }
    }

    pub fn task(&self) -> TaskKind {
        match self {
            OracleModel::FourClass { .. } => TaskKind::MultiClass(4),
            OracleModel::LinearRegression { .. } | OracleModel::NonlinearRegression { .. } => TaskKind::Regression,
            _ => TaskKind::Binary,
        }
    }

    pub fn noise_var(&self) -> Option<f64> {
        match self {
            OracleModel::LinearRegression { noise_var, .. } | OracleModel::NonlinearRegression { noise_var, .. } => {
                Some(*noise_var)
            }
            _ => None,
        }
    }

    /// Draws one sample into `x` and returns its label.
    ///
    /// `index` fixes the class of balanced settings (`index % 2`). Every row
    /// consumes the same number of draws whatever the parameters, so features
    /// stay paired across similarity levels under a shared seed.
    pub fn sample_into(&self, rng: &mut Rng, index: usize, x: &mut [f64]) -> f64 {
        let p = x.len();
        match self {
            OracleModel::Logistic { beta, chol } => {
                let z = rng::normals(rng, p);
                lower_mul(chol, &z, x);
                let u = rng::uniform(rng);
                f64::from(u < sigmoid(dot(beta, x)))
            }
            OracleModel::Probit { beta, noise_var } => {
                fill_normals(rng, x);
                let xi = rng::normal(rng);
                f64::from(dot(beta, x) + sqrt(*noise_var) * xi >= 0.0)
            }
            OracleModel::Lda { mu } => {
                let y = index % 2;
                let sign = if y == 1 { 1.0 } else { -1.0 };
                for (xi, m) in x.iter_mut().zip(mu) {
                    *xi = sign * m + rng::normal(rng);
                }
                y as f64
            }
            OracleModel::Qda { mu, chol } => {
                let y = index % 2;
                let sign = if y == 1 { 1.0 } else { -1.0 };
                let z = rng::normals(rng, p);
                lower_mul(&chol[y], &z, x);
                for (xi, m) in x.iter_mut().zip(mu) {
                    *xi += sign * m;
                }
                y as f64
            }
            OracleModel::Mixture { mu_base, mu_shift, alpha } => {
                let y = index % 2;
                let sign = if y == 1 { 1.0 } else { -1.0 };
                let u = rng::uniform(rng);
                let centre = if u < *alpha { mu_shift } else { mu_base };
                for (xi, m) in x.iter_mut().zip(centre) {
                    *xi = sign * m + rng::normal(rng);
                }
                y as f64
            }
            OracleModel::FourClass { beta1, beta2, noise_sd } => {
                fill_normals(rng, x);
                let z1 = dot(beta1, x) + noise_sd * rng::normal(rng);
                let z2 = dot(beta2, x) + noise_sd * rng::normal(rng);
                (2 * usize::from(z1 >= 0.0) + usize::from(z2 >= 0.0)) as f64
            }
            OracleModel::LinearRegression { beta, noise_var } => {
                fill_normals(rng, x);
                dot(beta, x) + sqrt(*noise_var) * rng::normal(rng)
            }
            OracleModel::NonlinearRegression { noise_var, .. } => {
                fill_normals(rng, x);
                self.regression_mean(x) + sqrt(*noise_var) * rng::normal(rng)
            }
        }
    }

    /// `E[Y | X = x]` for regression settings (0 for classification).
    pub fn regression_mean(&self, x: &[f64]) -> f64 {
        match self {
            OracleModel::LinearRegression { beta, .. } => dot(beta, x),
            OracleModel::NonlinearRegression { beta, .. } => {
                beta[0] * sin(x[0]) + beta[1] * x[1] * x[1] + beta[2] * x[2] * x[3] + beta[3] * exp(x[4])
            }
            _ => 0.0,
        }
    }

    /// Class posterior `P(Y = y | X = x)`; empty for regression.
    pub fn posterior(&self, x: &[f64]) -> Vec<f64> {
        match self {
            OracleModel::Logistic { beta, .. } => {
                let q = sigmoid(dot(beta, x));
                vec![1.0 - q, q]
            }
            OracleModel::Probit { beta, noise_var } => {
                let lin = dot(beta, x);
                let q = if *noise_var == 0.0 {
                    f64::from(lin >= 0.0)
                } else {
                    norm_cdf(lin / sqrt(*noise_var))
                };
                vec![1.0 - q, q]
            }
            OracleModel::Lda { .. } | OracleModel::Qda { .. } | OracleModel::Mixture { .. } => {
                // log-space for the QDA quadratic forms
                let l0 = self.log_class_density(x, 0);
                let l1 = self.log_class_density(x, 1);
                let q = sigmoid(l1 - l0);
                vec![1.0 - q, q]
            }
            OracleModel::FourClass { beta1, beta2, noise_sd } => {
                let prob = |lin: f64| {
                    if *noise_sd == 0.0 {
                        f64::from(lin >= 0.0)
                    } else {
                        norm_cdf(lin / noise_sd)
                    }
                };
                let q1 = prob(dot(beta1, x));
                let q2 = prob(dot(beta2, x));
                vec![(1.0 - q1) * (1.0 - q2), (1.0 - q1) * q2, q1 * (1.0 - q2), q1 * q2]
            }
            OracleModel::LinearRegression { .. } | OracleModel::NonlinearRegression { .. } => Vec::new(),
        }
    }

    /// Log class-conditional density (up to a constant shared by both classes).
    fn log_class_density(&self, x: &[f64], y: usize) -> f64 {
        let sign = if y == 1 { 1.0 } else { -1.0 };
        match self {
            OracleModel::Lda { mu } => {
                -0.5 * x.iter().zip(mu).map(|(a, m)| (a - sign * m) * (a - sign * m)).sum::<f64>()
            }
            OracleModel::Qda { mu, chol } => {
                let p = mu.len();
                let diff: Vec<f64> = x.iter().zip(mu).map(|(a, m)| a - sign * m).collect();
                let mut work = vec![0.0; p];
                -0.5 * lower_solve_sq(&chol[y], &diff, &mut work) - 0.5 * log_det_lower(&chol[y], p)
            }
            OracleModel::Mixture { mu_base, mu_shift, alpha } => {
                // factor out the larger exponent before mixing
                let d_base: f64 = -0.5 * x.iter().zip(mu_base).map(|(a, m)| (a - sign * m) * (a - sign * m)).sum::<f64>();
                let d_shift: f64 =
                    -0.5 * x.iter().zip(mu_shift).map(|(a, m)| (a - sign * m) * (a - sign * m)).sum::<f64>();
                let top = d_base.max(d_shift);
                top + ln((1.0 - alpha) * exp(d_base - top) + alpha * exp(d_shift - top))
            }
            _ => 0.0,
        }
    }

    /// Joint density `P(y) f(x | y)` for the Gaussian class-conditional settings.
    pub fn joint_density(&self, x: &[f64], y: usize) -> Option<f64> {
        let norm = libm::pow(2.0 * math::PI, -0.5 * x.len() as f64);
        let sign = if y == 1 { 1.0 } else { -1.0 };
        match self {
            OracleModel::Lda { mu } => Some(0.5 * norm * iso_kernel(x, mu, sign)),
            OracleModel::Mixture { mu_base, mu_shift, alpha } => Some(
                0.5 * norm * ((1.0 - alpha) * iso_kernel(x, mu_base, sign) + alpha * iso_kernel(x, mu_shift, sign)),
            ),
            OracleModel::Qda { .. } => Some(0.5 * norm * exp(self.log_class_density(x, y))),
            _ => None,
        }
    }

    /// Bayes-optimal prediction at `x`.
    pub fn predict_one(&self, x: &[f64]) -> f64 {
        match self.task() {
            TaskKind::Regression => self.regression_mean(x),
            _ => math::argmax(&self.posterior(x)) as f64,
        }
    }
}

fn fill_normals(rng: &mut Rng, x: &mut [f64]) {
    for v in x.iter_mut() {
        *v = rng::normal(rng);
    }
}

/// Applies the Bayes rule of `oracle` to every row of `data`.
pub fn bayes_predict(oracle: &OracleModel, data: &Dataset) -> Result<Vec<f64>> {
    if data.p() != oracle.p() {
        return Err(Error::DimensionMismatch { expected: oracle.p(), got: data.p() });
    }
    Ok(data.rows().map(|row| oracle.predict_one(row)).collect())
}
