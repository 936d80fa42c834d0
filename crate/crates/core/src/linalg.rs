//! Small dense helpers on top of nalgebra; matrices are row-major slices here.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::math::{ln, sqrt};

/// Lower Cholesky factor of a row-major SPD matrix, row-major.
pub fn cholesky_lower(a: &[f64], p: usize) -> Result<Vec<f64>> {
    let m = DMatrix::from_row_slice(p, p, a);
    let l = m
        .cholesky()
        .ok_or_else(|| Error::Numerical("matrix is not positive definite".into()))?
        .l();
    let mut out = vec![0.0; p * p];
    for r in 0..p {
        for c in 0..=r {
            out[r * p + c] = l[(r, c)];
        }
    }
    Ok(out)
}

/// `out = L z` for row-major lower-triangular `L`.
pub fn lower_mul(l: &[f64], z: &[f64], out: &mut [f64]) {
    let p = z.len();
    for r in 0..p {
        out[r] = (0..=r).map(|c| l[r * p + c] * z[c]).sum();
    }
}

/// `||L^{-1} v||^2` by forward substitution; `work` holds `L^{-1} v` afterwards.
pub fn lower_solve_sq(l: &[f64], v: &[f64], work: &mut [f64]) -> f64 {
    let p = v.len();
    let mut total = 0.0;
    for r in 0..p {
        let mut s = v[r];
        for c in 0..r {
            s -= l[r * p + c] * work[c];
        }
        work[r] = s / l[r * p + r];
        total += work[r] * work[r];
    }
    total
}

pub fn log_det_lower(l: &[f64], p: usize) -> f64 {
    (0..p).map(|i| 2.0 * ln(l[i * p + i])).sum()
}

/// Solves `H d = g` for symmetric positive (semi)definite `H`, adding a growing
/// ridge when the Cholesky factorisation fails.
pub fn solve_spd(h: &DMatrix<f64>, g: &DVector<f64>) -> Result<DVector<f64>> {
    if let Some(ch) = h.clone().cholesky() {
        return Ok(ch.solve(g));
    }
    let scale = (0..h.nrows()).map(|i| h[(i, i)].abs()).fold(0.0, f64::max).max(1e-300);
    let mut ridge = 1e-10 * scale;
    for _ in 0..12 {
        let mut hr = h.clone();
        for i in 0..hr.nrows() {
            hr[(i, i)] += ridge;
        }
        if let Some(ch) = hr.cholesky() {
            return Ok(ch.solve(g));
        }
        ridge *= 10.0;
    }
    Err(Error::Numerical("Newton system is not positive definite".into()))
}

/// Symmetric PSD square root via eigen-decomposition, clamping negative
/// eigenvalues at zero.
pub fn sqrtm_psd(a: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = a.clone().symmetric_eigen();
    let root = eig.eigenvalues.map(|v| sqrt(v.max(0.0)));
    &eig.eigenvectors * DMatrix::from_diagonal(&root) * eig.eigenvectors.transpose()
}

/// Sum of square roots of the (clamped) eigenvalues of a symmetric matrix.
pub fn trace_sqrt_psd(a: &DMatrix<f64>) -> f64 {
    a.clone().symmetric_eigen().eigenvalues.iter().map(|v| sqrt(v.max(0.0))).sum()
}
