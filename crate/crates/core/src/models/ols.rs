//! (Weighted) least squares with an intercept, solved by SVD.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::math::{dot, sqrt};

#[derive(Debug, Clone, PartialEq)]
pub struct Ols {
    /// Intercept first.
    pub coef: Vec<f64>,
}

impl Ols {
    pub fn fit(x: &[f64], p: usize, y: &[f64], w: &[f64]) -> Result<Self> {
        let n = y.len();
        let mut a = DMatrix::zeros(n, p + 1);
        let mut b = DVector::zeros(n);
        for (i, row) in x.chunks_exact(p).enumerate() {
            let s = sqrt(w[i]);
            a[(i, 0)] = s;
            for j in 0..p {
                a[(i, j + 1)] = s * row[j];
            }
            b[i] = s * y[i];
        }
        let coef = a.svd(true, true).solve(&b, 1e-12).map_err(|e| Error::Numerical(e.into()))?;
        Ok(Ols { coef: coef.iter().copied().collect() })
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.coef[0] + dot(&self.coef[1..], row)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolates_a_noiseless_line() {
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        let m = Ols::fit(&x, 1, &y, &[1.0; 10]).unwrap();
        assert!((m.predict_row(&[3.0]) - 6.0).abs() < 1e-8);
    }

    #[test]
    fn collinear_columns_give_minimum_norm_solution() {
        let x: Vec<f64> = (0..8).flat_map(|i| [i as f64, i as f64]).collect();
        let y: Vec<f64> = (0..8).map(|i| 4.0 * i as f64).collect();
        let m = Ols::fit(&x, 2, &y, &[1.0; 8]).unwrap();
        assert!((m.coef[1] - m.coef[2]).abs() < 1e-8);
        assert!((m.predict_row(&[5.0, 5.0]) - 20.0).abs() < 1e-8);
    }
}
