//! Float helpers over `libm` so the crate stays `no_std`.

use alloc::vec::Vec;

pub use libm::{acos, cos, erf, erfc, exp, log as ln, sin, sqrt};

pub const PI: f64 = core::f64::consts::PI;

#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

#[inline]
pub fn powi(x: f64, n: i32) -> f64 {
    libm::pow(x, n as f64)
}

/// Standard normal CDF, erfc-based so both tails keep relative precision.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / core::f64::consts::SQRT_2)
}

pub fn norm_pdf(x: f64) -> f64 {
    exp(-0.5 * x * x) / sqrt(2.0 * PI)
}

/// `ln Φ(x)`, switching to the asymptotic series where `erfc` underflows.
pub fn log_norm_cdf(x: f64) -> f64 {
    if x > -30.0 {
        ln(norm_cdf(x))
    } else {
        let z2 = x * x;
        -0.5 * z2 - ln(-x) - 0.5 * ln(2.0 * PI) + libm::log1p(-1.0 / z2 + 3.0 / (z2 * z2))
    }
}

/// Inverse Mills ratio `φ(x) / Φ(x)`.
pub fn mills(x: f64) -> f64 {
    exp(-0.5 * x * x - 0.5 * ln(2.0 * PI) - log_norm_cdf(x))
}

/// `ln Σ exp(v)`.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let m = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + ln(values.iter().map(|v| exp(v - m)).sum::<f64>())
}

/// Angle between two non-zero vectors, accurate near 0 and π where `acos`
/// of a rounded cosine is not.
pub fn angle_between(a: &[f64], b: &[f64]) -> f64 {
    let (na, nb) = (norm(a), norm(b));
    let mut diff = 0.0;
    let mut sum = 0.0;
    for (x, y) in a.iter().zip(b) {
        let (u, v) = (x / na, y / nb);
        diff += (u - v) * (u - v);
        sum += (u + v) * (u + v);
    }
    2.0 * libm::atan2(sqrt(diff), sqrt(sum))
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    sqrt(dot(a, a))
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n - 1 denominator); zero for fewer than two values.
pub fn sample_sd(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    sqrt(ss / (xs.len() - 1) as f64)
}

/// Logistic sigmoid, stable for large |z|.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + exp(-z))
    } else {
        let e = exp(z);
        e / (1.0 + e)
    }
}

/// log(1 + exp(z)) without overflow.
pub fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + libm::log1p(exp(-z))
    } else {
        libm::log1p(exp(z))
    }
}

/// `softmax(-lambda * errors)`, shifted by the minimum error for stability.
pub fn softmax_neg(errors: &[f64], lambda: f64) -> Vec<f64> {
    let min = errors.iter().cloned().fold(f64::INFINITY, f64::min);
    let raw: Vec<f64> = errors.iter().map(|e| exp(-lambda * (e - min))).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|r| r / total).collect()
}

/// Index of the largest value; ties go to the smallest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_norm_cdf_is_continuous_at_the_switch() {
        let a = log_norm_cdf(-30.0 + 1e-9);
        let b = log_norm_cdf(-30.0 - 1e-9);
        assert!((a - b).abs() < 1e-6 * a.abs());
        assert!((log_norm_cdf(0.0) - 0.5f64.ln()).abs() < 1e-15);
        assert!(mills(-50.0) > 49.9 && mills(-50.0) < 50.1);
    }

    #[test]
    fn norm_cdf_reference_points() {
        assert!((norm_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((norm_cdf(1.959963984540054) - 0.975).abs() < 1e-12);
        assert!((norm_cdf(-1.0) - 0.15865525393145707).abs() < 1e-14);
    }

    #[test]
    fn softmax_lambda_zero_is_uniform() {
        let w = softmax_neg(&[0.1, 0.4, 0.9], 0.0);
        assert!(w.iter().all(|x| *x == 1.0 / 3.0));
    }

    #[test]
    fn argmax_ties_to_smallest() {
        assert_eq!(argmax(&[1.0, 3.0, 3.0]), 1);
        assert_eq!(argmax(&[2.0, 2.0]), 0);
    }
}
