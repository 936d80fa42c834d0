//! Distribution distances between datasets from Gaussian fits.
//!
//! `kl_gaussian` and `w2_gaussian` only look at the feature marginals.
//! `otdd_gaussian` is label aware: points are compared with the cost
//! `‖x - x'‖² + W2²(class y, class y')` and transported with entropic OT.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{sqrtm_psd, trace_sqrt_psd};
use crate::math::{exp, ln, log_sum_exp, sqrt};

/// Sinkhorn regularisation as a fraction of the median ground cost.
pub const SINKHORN_EPS_FRACTION: f64 = 0.1;
pub const SINKHORN_ITERS: usize = 500;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianFit {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

impl GaussianFit {
    /// Population parameters; `cov` must be symmetric positive definite.
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        if cov.nrows() != mean.len() || cov.ncols() != mean.len() {
            return Err(Error::DimensionMismatch { expected: mean.len(), got: cov.nrows() });
        }
        if cov.clone().cholesky().is_none() {
            return Err(Error::invalid("covariance is not positive definite"));
        }
        Ok(GaussianFit { mean, cov })
    }

    /// Sample mean and `n - 1` covariance of row-major features, plus a ridge
    /// of `1e-6·trace/p` (at least `1e-9`).
    pub fn from_rows(x: &[f64], p: usize) -> Result<Self> {
        let n = x.len() / p;
        if n < 2 {
            return Err(Error::invalid(format!("need at least 2 rows for a Gaussian fit, got {n}")));
        }
        let mut mean = DVector::zeros(p);
        for row in x.chunks_exact(p) {
            for j in 0..p {
                mean[j] += row[j];
            }
        }
        mean /= n as f64;
        let mut cov = DMatrix::<f64>::zeros(p, p);
        for row in x.chunks_exact(p) {
            for a in 0..p {
                let da = row[a] - mean[a];
                for b in a..p {
                    cov[(a, b)] += da * (row[b] - mean[b]);
                }
            }
        }
        for a in 0..p {
            for b in a..p {
                cov[(a, b)] /= (n - 1) as f64;
                cov[(b, a)] = cov[(a, b)];
            }
        }
        let ridge = f64::max(1e-6 * cov.trace() / p as f64, 1e-9);
        for d in 0..p {
            cov[(d, d)] += ridge;
        }
        Ok(GaussianFit { mean, cov })
    }

    pub fn fit(data: &Dataset) -> Result<Self> {
        Self::from_rows(data.raw(), data.p())
    }

    pub fn p(&self) -> usize {
        self.mean.len()
    }
}

fn check_pair(a: &Dataset, b: &Dataset) -> Result<()> {
    if a.p() != b.p() {
        return Err(Error::DimensionMismatch { expected: a.p(), got: b.p() });
    }
    for d in [a, b] {
        if d.n() < d.p() + 2 {
            return Err(Error::invalid(format!("need at least p + 2 = {} rows, got {}", d.p() + 2, d.n())));
        }
    }
    Ok(())
}

/// `KL(N_a ‖ N_b)`.
pub fn kl_between(a: &GaussianFit, b: &GaussianFit) -> Result<f64> {
    if a.p() != b.p() {
        return Err(Error::DimensionMismatch { expected: a.p(), got: b.p() });
    }
    if a == b {
        return Ok(0.0);
    }
    let p = a.p() as f64;
    let chol_b = b.cov.clone().cholesky().ok_or_else(|| Error::Numerical("covariance is not positive definite".into()))?;
    let chol_a = a.cov.clone().cholesky().ok_or_else(|| Error::Numerical("covariance is not positive definite".into()))?;
    let trace = chol_b.solve(&a.cov).trace();
    let diff = &b.mean - &a.mean;
    let maha = diff.dot(&chol_b.solve(&diff));
    let log_det = |l: &DMatrix<f64>| (0..l.nrows()).map(|i| 2.0 * ln(l[(i, i)])).sum::<f64>();
    let kl = 0.5 * (trace + maha - p + log_det(&chol_b.l()) - log_det(&chol_a.l()));
    Ok(kl.max(0.0))
}

/// Squared Bures-Wasserstein distance between two Gaussians.
pub fn w2_squared_between(a: &GaussianFit, b: &GaussianFit) -> Result<f64> {
    if a.p() != b.p() {
        return Err(Error::DimensionMismatch { expected: a.p(), got: b.p() });
    }
    if a == b {
        return Ok(0.0);
    }
    let root_a = sqrtm_psd(&a.cov);
    let inner = &root_a * &b.cov * &root_a;
    let inner = 0.5 * (&inner + inner.transpose());
    let mean_term = (&a.mean - &b.mean).norm_squared();
    Ok((mean_term + a.cov.trace() + b.cov.trace() - 2.0 * trace_sqrt_psd(&inner)).max(0.0))
}

pub fn w2_between(a: &GaussianFit, b: &GaussianFit) -> Result<f64> {
    Ok(sqrt(w2_squared_between(a, b)?))
}

/// KL divergence between Gaussian fits of the two feature matrices.
pub fn kl_gaussian(a: &Dataset, b: &Dataset) -> Result<f64> {
    check_pair(a, b)?;
    kl_between(&GaussianFit::fit(a)?, &GaussianFit::fit(b)?)
}

/// Bures-Wasserstein-2 distance between Gaussian fits of the two feature matrices.
pub fn w2_gaussian(a: &Dataset, b: &Dataset) -> Result<f64> {
    check_pair(a, b)?;
    w2_between(&GaussianFit::fit(a)?, &GaussianFit::fit(b)?)
}

fn class_fits(d: &Dataset, k: usize) -> Result<Vec<Option<GaussianFit>>> {
    let ids = d.class_ids();
    (0..k)
        .map(|c| {
            let rows: Vec<usize> = (0..d.n()).filter(|i| ids[*i] == c).collect();
            match rows.len() {
                0 => Ok(None),
                1 => {
                    let p = d.p();
                    let mean = DVector::from_column_slice(d.row(rows[0]));
                    Ok(Some(GaussianFit { mean, cov: DMatrix::identity(p, p) * 1e-9 }))
                }
                _ => {
                    let x: Vec<f64> = rows.iter().flat_map(|i| d.row(*i).iter().copied()).collect();
                    GaussianFit::from_rows(&x, d.p()).map(Some)
                }
            }
        })
        .collect()
}

/// Label-aware OT distance: debiased entropic OT under the augmented cost,
/// square-rooted. Zero for identical datasets, symmetric in its arguments.
pub fn otdd_gaussian(a: &Dataset, b: &Dataset) -> Result<f64> {
    if !a.task().is_classification() || !b.task().is_classification() {
        return Err(Error::UnsupportedTask("OTDD needs class labels; regression is not supported".into()));
    }
    if a.task() != b.task() {
        return Err(Error::invalid(format!("label spaces differ: {} vs {}", a.task(), b.task())));
    }
    if a.p() != b.p() {
        return Err(Error::DimensionMismatch { expected: a.p(), got: b.p() });
    }
    if a == b {
        return Ok(0.0);
    }
    let k = a.task().classes().expect("classification");
    let fa = class_fits(a, k)?;
    let fb = class_fits(b, k)?;
    let label_cost = |x: &[Option<GaussianFit>], y: &[Option<GaussianFit>]| -> Result<Vec<f64>> {
        let mut out = vec![0.0; k * k];
        for i in 0..k {
            for j in 0..k {
                if let (Some(p), Some(q)) = (&x[i], &y[j]) {
                    out[i * k + j] = w2_squared_between(p, q)?;
                }
            }
        }
        Ok(out)
    };
    let ab = entropic_ot(a, b, &label_cost(&fa, &fb)?, k)?;
    let aa = entropic_ot(a, a, &label_cost(&fa, &fa)?, k)?;
    let bb = entropic_ot(b, b, &label_cost(&fb, &fb)?, k)?;
    Ok(sqrt((ab - 0.5 * aa - 0.5 * bb).max(0.0)))
}

fn ground_cost(a: &Dataset, b: &Dataset, label_cost: &[f64], k: usize) -> Vec<f64> {
    let (ya, yb) = (a.class_ids(), b.class_ids());
    let mut c = Vec::with_capacity(a.n() * b.n());
    for i in 0..a.n() {
        let xi = a.row(i);
        for j in 0..b.n() {
            let d2: f64 = xi.iter().zip(b.row(j)).map(|(u, v)| (u - v) * (u - v)).sum();
            c.push(d2 + label_cost[ya[i] * k + yb[j]]);
        }
    }
    c
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|x, y| x.total_cmp(y));
    let m = v.len() / 2;
    if v.len().is_multiple_of(2) {
        0.5 * (v[m - 1] + v[m])
    } else {
        v[m]
    }
}

/// Regularised OT value (dual objective) between uniform empirical measures.
fn entropic_ot(a: &Dataset, b: &Dataset, label_cost: &[f64], k: usize) -> Result<f64> {
    let cost = ground_cost(a, b, label_cost, k);
    let eps = SINKHORN_EPS_FRACTION * median(&cost);
    if !(eps > 0.0) {
        return Ok(0.0);
    }
    match sinkhorn_kernel(&cost, a.n(), b.n(), eps, SINKHORN_ITERS) {
        Some(v) => Ok(v),
        None => sinkhorn_log(&cost, a.n(), b.n(), eps, SINKHORN_ITERS),
    }
}

/// Scaling-form Sinkhorn; `None` when the Gibbs kernel under- or overflows.
pub fn sinkhorn_kernel(cost: &[f64], n: usize, m: usize, eps: f64, iters: usize) -> Option<f64> {
    let kernel: Vec<f64> = cost.iter().map(|c| exp(-c / eps)).collect();
    let (a, b) = (1.0 / n as f64, 1.0 / m as f64);
    let mut u = vec![1.0; n];
    let mut v = vec![1.0; m];
    let mut kv = vec![0.0; m.max(n)];
    for _ in 0..iters {
        for i in 0..n {
            let s: f64 = kernel[i * m..(i + 1) * m].iter().zip(&v).map(|(k, vj)| k * vj).sum();
            u[i] = a / s;
        }
        kv[..m].iter_mut().for_each(|x| *x = 0.0);
        for i in 0..n {
            for (j, k) in kernel[i * m..(i + 1) * m].iter().enumerate() {
                kv[j] += k * u[i];
            }
        }
        for j in 0..m {
            v[j] = b / kv[j];
        }
        if !u.iter().chain(&v).all(|x| x.is_finite() && *x > 0.0) {
            return None;
        }
    }
    // potentials are f = eps·ln(u / a) and g = eps·ln(v / b)
    let value = eps * (a * u.iter().map(|x| ln(*x)).sum::<f64>() + b * v.iter().map(|x| ln(*x)).sum::<f64>() - ln(a) - ln(b));
    value.is_finite().then_some(value)
}

/// Log-domain Sinkhorn on uniform marginals; returns `<f, a> + <g, b>`.
pub fn sinkhorn_log(cost: &[f64], n: usize, m: usize, eps: f64, iters: usize) -> Result<f64> {
    let log_a = -ln(n as f64);
    let log_b = -ln(m as f64);
    let mut f = vec![0.0; n];
    let mut g = vec![0.0; m];
    let mut buf = vec![0.0; n.max(m)];
    for _ in 0..iters {
        for i in 0..n {
            for j in 0..m {
                buf[j] = (g[j] - cost[i * m + j]) / eps + log_b;
            }
            f[i] = -eps * log_sum_exp(&buf[..m]);
        }
        for j in 0..m {
            for i in 0..n {
                buf[i] = (f[i] - cost[i * m + j]) / eps + log_a;
            }
            g[j] = -eps * log_sum_exp(&buf[..n]);
        }
    }
    let value = f.iter().sum::<f64>() * exp(log_a) + g.iter().sum::<f64>() * exp(log_b);
    if !value.is_finite() {
        return Err(Error::NonFinite("Sinkhorn dual value".into()));
    }
    Ok(value)
}
