//! Logistic, probit and multinomial regression fitted by damped Newton steps.
//!
//! All three minimise a weighted mean negative log-likelihood with an optional
//! ridge on the non-intercept coefficients. Parameters are laid out with the
//! intercept first, `[b0, b1, ..., bp]`, one block per non-reference class for
//! the multinomial model.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::solve_spd;
use crate::math::{self, dot, exp, log_norm_cdf, mills, sigmoid, softplus};

/// Result of [`newton`].
#[derive(Debug, Clone)]
pub struct NewtonOutcome {
    pub theta: Vec<f64>,
    pub iterations: usize,
    pub objective: Vec<f64>,
    pub converged: bool,
    pub grad_inf: f64,
}

/// Objective value, gradient and (optionally) Hessian at a point.
pub type Eval = (f64, Vec<f64>, Option<DMatrix<f64>>);

/// Newton's method with step halving. A step is accepted only when the
/// objective does not increase, so the recorded history is non-increasing.
pub fn newton<F>(theta0: Vec<f64>, max_iter: usize, tol: f64, mut eval: F) -> Result<NewtonOutcome>
where
    F: FnMut(&[f64], bool) -> Eval,
{
    let mut theta = theta0;
    let (mut f, mut g, mut h) = eval(&theta, true);
    if !f.is_finite() {
        return Err(Error::NonFinite("initial objective".into()));
    }
    let mut objective = vec![f];
    let mut iterations = 0;
    while iterations < max_iter && inf_norm(&g) > tol {
        let hess = h.take().expect("hessian requested");
        let step = solve_spd(&hess, &DVector::from_column_slice(&g))?;
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..50 {
            let cand: Vec<f64> = theta.iter().zip(step.iter()).map(|(a, d)| a - t * d).collect();
            let fc = eval(&cand, false).0;
            if fc.is_finite() && fc <= f {
                accepted = Some(cand);
                break;
            }
            t *= 0.5;
        }
        let Some(next) = accepted else { break };
        theta = next;
        (f, g, h) = eval(&theta, true);
        objective.push(f);
        iterations += 1;
    }
    let grad_inf = inf_norm(&g);
    Ok(NewtonOutcome { theta, iterations, objective, converged: grad_inf <= tol, grad_inf })
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(math::abs(*x)))
}

/// Rows with a leading 1 for the intercept.
pub fn design(x: &[f64], p: usize) -> Vec<f64> {
    let n = x.len() / p;
    let mut out = Vec::with_capacity(n * (p + 1));
    for r in x.chunks_exact(p) {
        out.push(1.0);
        out.extend_from_slice(r);
    }
    out
}

fn add_outer(h: &mut DMatrix<f64>, offset_r: usize, offset_c: usize, scale: f64, row: &[f64]) {
    for a in 0..row.len() {
        let s = scale * row[a];
        for b in 0..row.len() {
            h[(offset_r + a, offset_c + b)] += s * row[b];
        }
    }
}

fn add_ridge(theta: &[f64], l2: f64, blocks: usize, d: usize, f: &mut f64, g: &mut [f64], h: Option<&mut DMatrix<f64>>) {
    if l2 <= 0.0 {
        return;
    }
    for b in 0..blocks {
        for j in 1..d {
            let i = b * d + j;
            *f += 0.5 * l2 * theta[i] * theta[i];
            g[i] += l2 * theta[i];
        }
    }
    if let Some(h) = h {
        for b in 0..blocks {
            for j in 1..d {
                h[(b * d + j, b * d + j)] += l2;
            }
        }
    }
}

/// Binary link for [`BinaryGlm`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Link {
    Logit,
    Probit,
}

/// Objective, gradient and Hessian of the binary GLM negative log-likelihood.
///
/// `xt` is the intercept-augmented design, `y` holds 0/1 targets.
pub fn binary_objective(link: Link, xt: &[f64], y: &[f64], w: &[f64], l2: f64, theta: &[f64], hessian: bool) -> Eval {
    let d = theta.len();
    let total: f64 = w.iter().sum();
    let mut f = 0.0;
    let mut g = vec![0.0; d];
    let mut h = hessian.then(|| DMatrix::zeros(d, d));
    for ((row, yi), wi) in xt.chunks_exact(d).zip(y).zip(w) {
        let z = dot(theta, row);
        let (loss, d1, d2) = match link {
            Link::Logit => {
                let s = sigmoid(z);
                (softplus(z) - yi * z, s - yi, s * (1.0 - s))
            }
            Link::Probit => {
                let sign = 2.0 * yi - 1.0;
                let m = mills(sign * z);
                (-log_norm_cdf(sign * z), -sign * m, m * (sign * z + m))
            }
        };
        f += wi * loss;
        for (gj, xj) in g.iter_mut().zip(row) {
            *gj += wi * d1 * xj;
        }
        if let Some(h) = h.as_mut() {
            add_outer(h, 0, 0, wi * d2, row);
        }
    }
    f /= total;
    g.iter_mut().for_each(|v| *v /= total);
    if let Some(h) = h.as_mut() {
        *h /= total;
    }
    add_ridge(theta, l2, 1, d, &mut f, &mut g, h.as_mut());
    (f, g, h)
}

/// Objective, gradient and Hessian of the multinomial negative log-likelihood
/// with class 0 as reference. `y` holds class ids `0..k`.
pub fn multinomial_objective(xt: &[f64], y: &[usize], w: &[f64], k: usize, l2: f64, theta: &[f64], hessian: bool) -> Eval {
    let dim = theta.len();
    let d = dim / (k - 1);
    let total: f64 = w.iter().sum();
    let mut f = 0.0;
    let mut g = vec![0.0; dim];
    let mut h = hessian.then(|| DMatrix::zeros(dim, dim));
    let mut z = vec![0.0; k];
    let mut prob = vec![0.0; k];
    for ((row, yi), wi) in xt.chunks_exact(d).zip(y).zip(w) {
        for c in 1..k {
            z[c] = dot(&theta[(c - 1) * d..c * d], row);
        }
        let lse = math::log_sum_exp(&z);
        f += wi * (lse - z[*yi]);
        for c in 0..k {
            prob[c] = exp(z[c] - lse);
        }
        for c in 1..k {
            let r = prob[c] - if *yi == c { 1.0 } else { 0.0 };
            for (gj, xj) in g[(c - 1) * d..c * d].iter_mut().zip(row) {
                *gj += wi * r * xj;
            }
        }
        if let Some(h) = h.as_mut() {
            for a in 1..k {
                for b in 1..k {
                    let s = prob[a] * (if a == b { 1.0 } else { 0.0 } - prob[b]);
                    add_outer(h, (a - 1) * d, (b - 1) * d, wi * s, row);
                }
            }
        }
    }
    f /= total;
    g.iter_mut().for_each(|v| *v /= total);
    if let Some(h) = h.as_mut() {
        *h /= total;
    }
    add_ridge(theta, l2, k - 1, d, &mut f, &mut g, h.as_mut());
    (f, g, h)
}

/// Fitted binary logistic or probit model.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryGlm {
    pub link: Link,
    /// Intercept first.
    pub theta: Vec<f64>,
}

impl BinaryGlm {
    pub fn fit(link: Link, x: &[f64], p: usize, y: &[f64], w: &[f64], l2: f64, max_iter: usize, tol: f64) -> Result<(Self, NewtonOutcome)> {
        let xt = design(x, p);
        let out = newton(vec![0.0; p + 1], max_iter, tol, |t, hess| binary_objective(link, &xt, y, w, l2, t, hess))?;
        Ok((BinaryGlm { link, theta: out.theta.clone() }, out))
    }

    pub fn score(&self, row: &[f64]) -> f64 {
        self.theta[0] + dot(&self.theta[1..], row)
    }

    /// Class 1 when the linear score is positive.
    pub fn predict_row(&self, row: &[f64]) -> usize {
        usize::from(self.score(row) > 0.0)
    }
}

/// Fitted softmax regression over `k` classes.
#[derive(Debug, Clone, PartialEq)]
pub struct Multinomial {
    pub k: usize,
    pub p: usize,
    pub theta: Vec<f64>,
}

impl Multinomial {
    pub fn fit(x: &[f64], p: usize, y: &[usize], w: &[f64], k: usize, l2: f64, max_iter: usize, tol: f64) -> Result<(Self, NewtonOutcome)> {
        let xt = design(x, p);
        let dim = (k - 1) * (p + 1);
        let out = newton(vec![0.0; dim], max_iter, tol, |t, hess| multinomial_objective(&xt, y, w, k, l2, t, hess))?;
        Ok((Multinomial { k, p, theta: out.theta.clone() }, out))
    }

    pub fn scores(&self, row: &[f64]) -> Vec<f64> {
        let d = self.p + 1;
        let mut z = vec![0.0; self.k];
        for (zc, b) in z[1..].iter_mut().zip(self.theta.chunks(d)) {
            *zc = b[0] + dot(&b[1..], row);
        }
        z
    }

    pub fn predict_row(&self, row: &[f64]) -> usize {
        math::argmax(&self.scores(row))
    }
}
