//! Gaussian discriminant analysis with pooled (LDA) or per-class (QDA) covariance.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::Result;
use crate::linalg::{cholesky_lower, log_det_lower, lower_solve_sq};
use crate::math::{self, ln};

const RIDGE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Discriminant {
    pub p: usize,
    pub quadratic: bool,
    pub means: Vec<Vec<f64>>,
    pub log_priors: Vec<f64>,
    /// Lower Cholesky factors, one shared factor for LDA.
    factors: Vec<Vec<f64>>,
    log_dets: Vec<f64>,
}

impl Discriminant {
    /// `y` holds local class ids `0..k`, every class present.
    pub fn fit(x: &[f64], p: usize, y: &[usize], w: &[f64], k: usize, quadratic: bool) -> Result<(Self, Vec<String>)> {
        let mut weight = vec![0.0; k];
        let mut means = vec![vec![0.0; p]; k];
        for ((row, c), wi) in x.chunks_exact(p).zip(y).zip(w) {
            weight[*c] += wi;
            for (m, v) in means[*c].iter_mut().zip(row) {
                *m += wi * v;
            }
        }
        for c in 0..k {
            means[c].iter_mut().for_each(|m| *m /= weight[c]);
        }
        let total: f64 = weight.iter().sum();
        let log_priors = weight.iter().map(|wc| ln(wc / total)).collect();

        let mut scatter = vec![DMatrix::<f64>::zeros(p, p); k];
        for ((row, c), wi) in x.chunks_exact(p).zip(y).zip(w) {
            let s = &mut scatter[*c];
            for a in 0..p {
                let da = row[a] - means[*c][a];
                for b in 0..p {
                    s[(a, b)] += wi * da * (row[b] - means[*c][b]);
                }
            }
        }
        // weights are rescaled to sum to the row count so the usual degrees of freedom apply
        let scale = x.len() as f64 / p as f64 / total;
        let mut warnings = Vec::new();
        let covs: Vec<DMatrix<f64>> = if quadratic {
            (0..k)
                .map(|c| {
                    let dof = (weight[c] * scale - 1.0).max(1.0);
                    &scatter[c] * (scale / dof)
                })
                .collect()
        } else {
            let n = total * scale;
            let dof = if n > k as f64 { n - k as f64 } else { n };
            let pooled = scatter.iter().fold(DMatrix::zeros(p, p), |acc, s| acc + s);
            vec![pooled * (scale / dof)]
        };
        let mut factors = Vec::with_capacity(covs.len());
        let mut log_dets = Vec::with_capacity(covs.len());
        for (i, mut cov) in covs.into_iter().enumerate() {
            if is_singular(&cov) {
                for d in 0..p {
                    cov[(d, d)] += RIDGE;
                }
                warnings.push(if quadratic {
                    alloc::format!("class {i} covariance is singular; added {RIDGE:e}*I")
                } else {
                    alloc::format!("pooled covariance is singular; added {RIDGE:e}*I")
                });
            }
            let flat: Vec<f64> = (0..p * p).map(|t| cov[(t / p, t % p)]).collect();
            let l = cholesky_lower(&flat, p)?;
            log_dets.push(log_det_lower(&l, p));
            factors.push(l);
        }
        Ok((Discriminant { p, quadratic, means, log_priors, factors, log_dets }, warnings))
    }

    pub fn scores(&self, row: &[f64]) -> Vec<f64> {
        let mut diff = vec![0.0; self.p];
        let mut work = vec![0.0; self.p];
        (0..self.means.len())
            .map(|c| {
                let f = if self.quadratic { c } else { 0 };
                for (d, (a, b)) in diff.iter_mut().zip(row.iter().zip(&self.means[c])) {
                    *d = a - b;
                }
                let maha = lower_solve_sq(&self.factors[f], &diff, &mut work);
                self.log_priors[c] - 0.5 * self.log_dets[f] - 0.5 * maha
            })
            .collect()
    }

    pub fn predict_row(&self, row: &[f64]) -> usize {
        math::argmax(&self.scores(row))
    }
}

fn is_singular(cov: &DMatrix<f64>) -> bool {
    let eig = cov.clone().symmetric_eigen().eigenvalues;
    let max = eig.iter().cloned().fold(0.0, f64::max);
    let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    !(max > 0.0) || min <= 1e-12 * max
}
