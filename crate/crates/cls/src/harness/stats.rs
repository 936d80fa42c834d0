use crate::error::{Error, Result};

/// Mean absolute deviation between estimates and oracle values.
pub fn diff_metric(estimates: &[f64], oracles: &[f64]) -> Result<f64> {
    if estimates.len() != oracles.len() {
        return Err(cls_core::Error::LengthMismatch { left: estimates.len(), right: oracles.len() }.into());
    }
    if estimates.is_empty() {
        return Err(Error::usage("diff needs at least one value"));
    }
    Ok(estimates.iter().zip(oracles).map(|(e, o)| (e - o).abs()).sum::<f64>() / estimates.len() as f64)
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)
}

/// Ranks starting at 1; ties share their average rank.
fn ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|a, b| x[*a].total_cmp(&x[*b]));
    let mut out = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for k in i..=j {
            out[idx[k]] = r;
        }
        i = j + 1;
    }
    out
}

/// Absolute Pearson and Spearman correlations; zero when either input is constant.
pub fn pearson_spearman(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() {
        return Err(cls_core::Error::LengthMismatch { left: x.len(), right: y.len() }.into());
    }
    if x.len() < 2 {
        return Err(Error::usage("correlation needs at least two points"));
    }
    Ok((pearson(x, y).abs(), pearson(&ranks(x), &ranks(y)).abs()))
}
