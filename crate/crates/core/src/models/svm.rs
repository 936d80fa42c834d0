//! Support vector classification and regression solved by SMO.
//!
//! The solver follows the libsvm decomposition: second-order working set
//! selection over the dual `min ½ aᵀQa + pᵀa` with `yᵀa = const` and box
//! constraints `0 <= a_i <= C`.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::{self, dot, exp};

const TAU: f64 = 1e-12;
/// Above this many rows the kernel matrix is evaluated row by row instead of cached.
const FULL_KERNEL_ROWS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kernel {
    Linear,
    Rbf { gamma: f64 },
}

impl Kernel {
    #[inline]
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Kernel::Linear => dot(a, b),
            Kernel::Rbf { gamma } => {
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                exp(-gamma * d2)
            }
        }
    }
}

struct KernelRows<'a> {
    x: &'a [f64],
    p: usize,
    n: usize,
    kernel: Kernel,
    full: Option<Vec<f64>>,
}

impl<'a> KernelRows<'a> {
    fn new(x: &'a [f64], p: usize, kernel: Kernel) -> Self {
        let n = x.len() / p;
        let full = (n <= FULL_KERNEL_ROWS).then(|| {
            let mut k = vec![0.0; n * n];
            for i in 0..n {
                for j in i..n {
                    let v = kernel.eval(&x[i * p..(i + 1) * p], &x[j * p..(j + 1) * p]);
                    k[i * n + j] = v;
                    k[j * n + i] = v;
                }
            }
            k
        });
        KernelRows { x, p, n, kernel, full }
    }

    fn row<'b>(&'b self, i: usize, buf: &'b mut Vec<f64>) -> &'b [f64] {
        if let Some(k) = &self.full {
            return &k[i * self.n..(i + 1) * self.n];
        }
        buf.clear();
        let xi = &self.x[i * self.p..(i + 1) * self.p];
        buf.extend(self.x.chunks_exact(self.p).map(|xj| self.kernel.eval(xi, xj)));
        buf
    }

    fn diag(&self, i: usize) -> f64 {
        let xi = &self.x[i * self.p..(i + 1) * self.p];
        self.kernel.eval(xi, xi)
    }
}

/// Output of [`smo`].
#[derive(Debug, Clone)]
pub struct SmoSolution {
    pub alpha: Vec<f64>,
    pub rho: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Dual objective after every `l` iterations and at termination.
    pub objective: Vec<f64>,
}

/// SMO on `l = y.len()` variables where `Q_ij = y_i y_j K(i mod n, j mod n)`.
///
/// `eps` bounds the maximal KKT violation at termination; `max_iter` caps the
/// number of pair updates.
fn smo(rows: &KernelRows<'_>, y: &[f64], lin: &[f64], c: f64, eps: f64, max_iter: usize) -> SmoSolution {
    let l = y.len();
    let n = rows.n;
    let qd: Vec<f64> = (0..l).map(|i| rows.diag(i % n)).collect();
    let mut alpha = vec![0.0; l];
    let mut grad = lin.to_vec();
    let mut buf_i = Vec::new();
    let mut buf_j = Vec::new();
    let mut objective = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    let upper = |a: f64| a >= c;
    let lower = |a: f64| a <= 0.0;

    while iterations < max_iter {
        if iterations % l == 0 {
            objective.push(dual_objective(&alpha, &grad, lin));
        }
        // first index: maximal violating pair component
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = usize::MAX;
        for t in 0..l {
            if y[t] > 0.0 {
                if !upper(alpha[t]) && -grad[t] >= gmax {
                    gmax = -grad[t];
                    i_sel = t;
                }
            } else if !lower(alpha[t]) && grad[t] >= gmax {
                gmax = grad[t];
                i_sel = t;
            }
        }
        if i_sel == usize::MAX {
            converged = true;
            break;
        }
        let i = i_sel;
        let k_i = rows.row(i % n, &mut buf_i);
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j_sel = usize::MAX;
        let mut best = f64::INFINITY;
        for t in 0..l {
            let q_it = y[i] * y[t] * k_i[t % n];
            if y[t] > 0.0 {
                if !lower(alpha[t]) {
                    let diff = gmax + grad[t];
                    if grad[t] >= gmax2 {
                        gmax2 = grad[t];
                    }
                    if diff > 0.0 {
                        let quad = qd[i] + qd[t] - 2.0 * y[i] * q_it;
                        let obj = -(diff * diff) / if quad > 0.0 { quad } else { TAU };
                        if obj <= best {
                            best = obj;
                            j_sel = t;
                        }
                    }
                }
            } else if !upper(alpha[t]) {
                let diff = gmax - grad[t];
                if -grad[t] >= gmax2 {
                    gmax2 = -grad[t];
                }
                if diff > 0.0 {
                    let quad = qd[i] + qd[t] + 2.0 * y[i] * q_it;
                    let obj = -(diff * diff) / if quad > 0.0 { quad } else { TAU };
                    if obj <= best {
                        best = obj;
                        j_sel = t;
                    }
                }
            }
        }
        if gmax + gmax2 < eps || j_sel == usize::MAX {
            converged = true;
            break;
        }
        let j = j_sel;
        let q_ij = y[i] * y[j] * k_i[j % n];
        let (old_i, old_j) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let mut quad = qd[i] + qd[j] + 2.0 * q_ij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let mut quad = qd[i] + qd[j] - 2.0 * q_ij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        let k_j = rows.row(j % n, &mut buf_j);
        let k_i = rows.row(i % n, &mut buf_i);
        for t in 0..l {
            grad[t] += y[t] * (y[i] * k_i[t % n] * di + y[j] * k_j[t % n] * dj);
        }
        iterations += 1;
    }
    objective.push(dual_objective(&alpha, &grad, lin));
    let rho = compute_rho(&alpha, &grad, y, c);
    SmoSolution { alpha, rho, iterations, converged, objective }
}

fn dual_objective(alpha: &[f64], grad: &[f64], lin: &[f64]) -> f64 {
    0.5 * alpha.iter().zip(grad.iter().zip(lin)).map(|(a, (g, p))| a * (g + p)).sum::<f64>()
}

fn compute_rho(alpha: &[f64], grad: &[f64], y: &[f64], c: f64) -> f64 {
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    let mut free = 0usize;
    let mut sum_free = 0.0;
    for t in 0..alpha.len() {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            sum_free += yg;
        }
    }
    if free > 0 {
        sum_free / free as f64
    } else {
        (ub + lb) / 2.0
    }
}

/// Kernel expansion `f(x) = Σ coef_i K(sv_i, x) - rho`, collapsed to a weight
/// vector for the linear kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub kernel: Kernel,
    pub p: usize,
    pub support: Vec<f64>,
    pub coef: Vec<f64>,
    pub weights: Option<Vec<f64>>,
    pub rho: f64,
}

impl Decision {
    fn new(kernel: Kernel, x: &[f64], p: usize, coef_all: &[f64], rho: f64) -> Self {
        let mut support = Vec::new();
        let mut coef = Vec::new();
        for (row, c) in x.chunks_exact(p).zip(coef_all) {
            if *c != 0.0 {
                support.extend_from_slice(row);
                coef.push(*c);
            }
        }
        let weights = matches!(kernel, Kernel::Linear).then(|| {
            let mut w = vec![0.0; p];
            for (row, c) in support.chunks_exact(p).zip(&coef) {
                for (wj, xj) in w.iter_mut().zip(row) {
                    *wj += c * xj;
                }
            }
            w
        });
        Decision { kernel, p, support, coef, weights, rho }
    }

    pub fn value(&self, row: &[f64]) -> f64 {
        if let Some(w) = &self.weights {
            return dot(w, row) - self.rho;
        }
        self.support
            .chunks_exact(self.p)
            .zip(&self.coef)
            .map(|(sv, c)| c * self.kernel.eval(sv, row))
            .sum::<f64>()
            - self.rho
    }
}

/// Two-class SVM on ±1 labels.
#[derive(Debug, Clone, PartialEq)]
pub struct BinarySvc {
    pub decision: Decision,
    /// Dual variables and ±1 labels of the training rows.
    pub alpha: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SolverStats {
    pub iterations: usize,
    pub converged: bool,
    pub objective: Vec<f64>,
}

impl BinarySvc {
    /// `positive[i]` marks the +1 class.
    pub fn fit(x: &[f64], p: usize, positive: &[bool], kernel: Kernel, c: f64, eps: f64, max_passes: usize) -> (Self, SolverStats) {
        let y: Vec<f64> = positive.iter().map(|b| if *b { 1.0 } else { -1.0 }).collect();
        let rows = KernelRows::new(x, p, kernel);
        let l = y.len();
        let sol = smo(&rows, &y, &vec![-1.0; l], c, eps, max_passes.saturating_mul(l));
        let coef: Vec<f64> = sol.alpha.iter().zip(&y).map(|(a, yi)| a * yi).collect();
        let decision = Decision::new(kernel, x, p, &coef, sol.rho);
        let stats = SolverStats { iterations: sol.iterations, converged: sol.converged, objective: sol.objective };
        (BinarySvc { decision, alpha: sol.alpha, y }, stats)
    }
}

/// One-vs-rest classifier; a single model when there are two classes.
#[derive(Debug, Clone, PartialEq)]
pub struct Svc {
    pub models: Vec<BinarySvc>,
}

impl Svc {
    /// `y` holds local class ids `0..k`.
    pub fn fit(x: &[f64], p: usize, y: &[usize], k: usize, kernel: Kernel, c: f64, eps: f64, max_passes: usize) -> (Self, Vec<SolverStats>) {
        let targets: Vec<usize> = if k == 2 { vec![1] } else { (0..k).collect() };
        let mut models = Vec::with_capacity(targets.len());
        let mut stats = Vec::with_capacity(targets.len());
        for class in targets {
            let positive: Vec<bool> = y.iter().map(|v| *v == class).collect();
            let (m, s) = BinarySvc::fit(x, p, &positive, kernel, c, eps, max_passes);
            models.push(m);
            stats.push(s);
        }
        (Svc { models }, stats)
    }

    pub fn predict_row(&self, row: &[f64]) -> usize {
        if self.models.len() == 1 {
            return usize::from(self.models[0].decision.value(row) > 0.0);
        }
        let values: Vec<f64> = self.models.iter().map(|m| m.decision.value(row)).collect();
        math::argmax(&values)
    }
}

/// Epsilon-insensitive support vector regression.
#[derive(Debug, Clone, PartialEq)]
pub struct Svr {
    pub decision: Decision,
}

impl Svr {
    pub fn fit(x: &[f64], p: usize, target: &[f64], kernel: Kernel, c: f64, epsilon: f64, eps: f64, max_passes: usize) -> (Self, SolverStats) {
        let n = target.len();
        let rows = KernelRows::new(x, p, kernel);
        let mut y = vec![1.0; 2 * n];
        let mut lin = vec![0.0; 2 * n];
        for i in 0..n {
            lin[i] = epsilon - target[i];
            lin[i + n] = epsilon + target[i];
            y[i + n] = -1.0;
        }
        let sol = smo(&rows, &y, &lin, c, eps, max_passes.saturating_mul(2 * n));
        let coef: Vec<f64> = (0..n).map(|i| sol.alpha[i] - sol.alpha[i + n]).collect();
        let decision = Decision::new(kernel, x, p, &coef, sol.rho);
        let stats = SolverStats { iterations: sol.iterations, converged: sol.converged, objective: sol.objective };
        (Svr { decision }, stats)
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.decision.value(row)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn blobs(seed: u64, n: usize) -> (Vec<f64>, Vec<bool>) {
        let mut r = rng::seeded(seed);
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..n {
            let pos = i % 2 == 0;
            let shift = if pos { 1.0 } else { -1.0 };
            x.push(shift + rng::normal(&mut r));
            x.push(shift + rng::normal(&mut r));
            y.push(pos);
        }
        (x, y)
    }

    #[test]
    fn rbf_solution_satisfies_box_and_equality_constraints() {
        let (x, y) = blobs(1, 80);
        let (m, stats) = BinarySvc::fit(&x, 2, &y, Kernel::Rbf { gamma: 0.5 }, 1.0, 1e-3, 10);
        assert!(stats.converged);
        assert!(m.alpha.iter().all(|a| (0.0..=1.0).contains(a)));
        let balance: f64 = m.alpha.iter().zip(&m.y).map(|(a, y)| a * y).sum();
        assert!(balance.abs() <= 1e-8, "{balance}");
        assert!(stats.objective.windows(2).all(|w| w[1] <= w[0] + 1e-9));
    }

    #[test]
    fn linear_weights_match_kernel_expansion() {
        let (x, y) = blobs(2, 40);
        let (m, _) = BinarySvc::fit(&x, 2, &y, Kernel::Linear, 1.0, 1e-3, 10);
        let mut expanded = m.decision.clone();
        expanded.weights = None;
        for row in x.chunks(2) {
            assert!((m.decision.value(row) - expanded.value(row)).abs() < 1e-10);
        }
    }

    #[test]
    fn separable_points_are_classified() {
        let x = [0.0, 0.0, 0.0, 1.0, 3.0, 3.0, 3.0, 4.0];
        let y = [false, false, true, true];
        let (m, _) = BinarySvc::fit(&x, 2, &y, Kernel::Linear, 10.0, 1e-3, 10);
        for (row, yi) in x.chunks(2).zip(&y) {
            assert_eq!(m.decision.value(row) > 0.0, *yi);
        }
    }

    #[test]
    fn svr_fits_a_line_within_the_tube() {
        let x: Vec<f64> = (0..20).map(|i| i as f64 / 10.0).collect();
        let t: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let (m, stats) = Svr::fit(&x, 1, &t, Kernel::Linear, 100.0, 0.1, 1e-3, 10);
        assert!(stats.converged);
        for (xi, ti) in x.iter().zip(&t) {
            assert!((m.predict_row(&[*xi]) - ti).abs() <= 0.1 + 1e-2);
        }
    }
}
