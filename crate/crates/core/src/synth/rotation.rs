//! Controlled-cosine parameter construction.
//!
//! A target parameter vector is written in hyperspherical coordinates
//! `(r, phi_1, ..., phi_{p-1})`. Shifting only the first angle by
//! `arccos(c)` and converting back yields a vector of the same norm whose
//! cosine with the original is exactly `c`.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{self, acos, cos, sin, sqrt, PI};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotationSpec {
    pub base: Vec<f64>,
    pub cosine: f64,
}

/// Hyperspherical angles of `v`; the radius is returned first.
///
/// Angles whose trailing coordinates are all zero are set to 0, which makes
/// the reconstruction well defined when `v` lies on a coordinate subspace.
pub fn to_hyperspherical(v: &[f64]) -> (f64, Vec<f64>) {
    let p = v.len();
    let r = math::norm(v);
    let mut tail_sq: Vec<f64> = Vec::with_capacity(p + 1);
    tail_sq.resize(p + 1, 0.0);
    for k in (0..p).rev() {
        tail_sq[k] = tail_sq[k + 1] + v[k] * v[k];
    }
    let mut angles = Vec::with_capacity(p.saturating_sub(1));
    for k in 0..p.saturating_sub(1) {
        let denom = sqrt(tail_sq[k]);
        let mut phi = if denom > 0.0 { acos((v[k] / denom).clamp(-1.0, 1.0)) } else { 0.0 };
        if k == p - 2 && v[p - 1] < 0.0 {
            phi = 2.0 * PI - phi;
        }
        angles.push(phi);
    }
    (r, angles)
}

pub fn from_hyperspherical(r: f64, angles: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(angles.len() + 1);
    let mut scale = r;
    for phi in angles {
        out.push(scale * cos(*phi));
        scale *= sin(*phi);
    }
    out.push(scale);
    out
}

/// Returns a vector with the base norm at cosine `spec.cosine` to the base.
pub fn rotate_to_cosine(spec: &RotationSpec) -> Result<Vec<f64>> {
    if spec.base.len() < 2 {
        return Err(Error::invalid("rotation needs p >= 2"));
    }
    if math::norm(&spec.base) == 0.0 {
        return Err(Error::invalid("rotation of a zero vector"));
    }
    if !(spec.cosine.abs() <= 1.0 + 1e-12) {
        return Err(Error::invalid("cosine outside [-1, 1]"));
    }
    let shift = acos(spec.cosine.clamp(-1.0, 1.0));
    let (r, mut angles) = to_hyperspherical(&spec.base);
    angles[0] -= shift;
    Ok(from_hyperspherical(r, &angles))
}

/// A vector orthogonal to `v` with the same norm (seeded Gram-Schmidt step).
pub fn orthogonal_complement(v: &[f64], seed: u64) -> Result<Vec<f64>> {
    if v.len() < 2 {
        return Err(Error::invalid("orthogonal complement needs p >= 2"));
    }
    let vv = math::dot(v, v);
    if vv == 0.0 {
        return Err(Error::invalid("orthogonal complement of a zero vector"));
    }
    let target_norm = sqrt(vv);
    let mut rng = rng::stream(seed, 0x0A7);
    loop {
        let mut u = rng::normals(&mut rng, v.len());
        // two passes keep the residual dot product at rounding level
        for _ in 0..2 {
            let coef = math::dot(&u, v) / vv;
            for (ui, vi) in u.iter_mut().zip(v) {
                *ui -= coef * vi;
            }
        }
        let un = math::norm(&u);
        if un > 1e-8 * target_norm {
            return Ok(u.into_iter().map(|x| x * target_norm / un).collect());
        }
    }
}
