//! Diagnostics over ensembles: exact one-dimensional W1, moments,
//! best-particle errors, histograms and box-plot summaries.

use serde::Serialize;

use crate::ensemble::Ensemble;
use crate::error::{check_dim, Error, Result};
use crate::objectives::Objective;
use crate::selection::argmin;

fn sorted_finite(xs: &[f64], what: &'static str) -> Result<Vec<f64>> {
    if xs.is_empty() {
        return Err(Error::Empty(what));
    }
    if xs.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite(what));
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Exact 1-Wasserstein distance between two empirical measures on the line.
pub fn wasserstein1_1d(a: &[f64], b: &[f64]) -> Result<f64> {
    let a = sorted_finite(a, "first sample")?;
    let b = sorted_finite(b, "second sample")?;
    Ok(wasserstein1_sorted(&a, &b))
}

/// [`wasserstein1_1d`] on inputs that are already sorted ascending.
///
/// Integrates `|Q_a(u) - Q_b(u)|` over `u in (0, 1)`. The quantile
/// functions are step functions with breakpoints `i/|a|` and `j/|b|`; the
/// breakpoints are compared in exact integer arithmetic.
pub fn wasserstein1_sorted(a: &[f64], b: &[f64]) -> f64 {
    let (n, m) = (a.len() as u128, b.len() as u128);
    if n == m {
        return a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64;
    }
    // Positions on the common grid of resolution 1/(n m).
    let total = n * m;
    let (mut i, mut j) = (0usize, 0usize);
    let mut pos: u128 = 0;
    let mut acc = 0.0;
    while pos < total {
        let next_a = (i as u128 + 1) * m;
        let next_b = (j as u128 + 1) * n;
        let next = next_a.min(next_b);
        acc += (next - pos) as f64 * (a[i] - b[j]).abs();
        pos = next;
        if next_a == next {
            i += 1;
        }
        if next_b == next {
            j += 1;
        }
    }
    acc / total as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleStats {
    pub mean: Vec<f64>,
    /// Componentwise, with the `1/N` convention.
    pub variance: Vec<f64>,
    pub best_index: usize,
    pub best_value: f64,
    /// `|X_best - x*|`.
    pub best_error_l2: f64,
    /// `|m[f] - x*|`.
    pub mean_error_l2: f64,
}

fn l2(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

pub fn ensemble_stats(ens: &Ensemble, values: &[f64], obj: &Objective) -> Result<EnsembleStats> {
    check_dim(ens.len(), values.len())?;
    check_dim(obj.dim(), ens.dim())?;
    let mean = ens.mean();
    let mut variance = vec![0.0; ens.dim()];
    for r in ens.rows() {
        for ((v, x), m) in variance.iter_mut().zip(r).zip(&mean) {
            *v += (x - m) * (x - m);
        }
    }
    let inv = 1.0 / ens.len() as f64;
    variance.iter_mut().for_each(|v| *v *= inv);
    let best_index = argmin(values);
    Ok(EnsembleStats {
        best_error_l2: l2(ens.row(best_index), obj.minimizer()),
        mean_error_l2: l2(&mean, obj.minimizer()),
        mean,
        variance,
        best_index,
        best_value: values[best_index],
    })
}

/// Histogram normalized to a probability density over `range`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityTable {
    pub edges: Vec<f64>,
    pub density: Vec<f64>,
    /// Samples outside `range`.
    pub overflow: usize,
}

impl DensityTable {
    pub fn bins(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.edges.windows(2).zip(&self.density).map(|(e, d)| (e[0], e[1], *d))
    }
}

/// Equal-width histogram on `[lo, hi]` (the right edge is included in the
/// last bin). Densities integrate to one over the range whenever any sample
/// falls inside it; otherwise every bin is zero.
pub fn histogram(samples: &[f64], bins: usize, range: (f64, f64)) -> Result<DensityTable> {
    let (lo, hi) = range;
    if bins == 0 {
        return Err(Error::InvalidParameter("histogram needs at least one bin".into()));
    }
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(Error::InvalidParameter(format!("degenerate histogram range [{lo}, {hi}]")));
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    let mut overflow = 0;
    for &s in samples {
        if !(lo..=hi).contains(&s) {
            overflow += 1;
            continue;
        }
        let k = (((s - lo) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    let edges = (0..=bins).map(|k| if k == bins { hi } else { lo + k as f64 * width }).collect();
    let inside = samples.len() - overflow;
    let norm = if inside == 0 { 0.0 } else { 1.0 / (inside as f64 * width) };
    Ok(DensityTable { edges, density: counts.iter().map(|&c| c as f64 * norm).collect(), overflow })
}

/// Quantile of sorted data by linear interpolation between order statistics
/// (`h = (n - 1) p`).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxStats {
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    /// Most extreme data points inside the `1.5 IQR` fences.
    pub whisker_low: f64,
    pub whisker_high: f64,
    pub outliers: Vec<f64>,
}

pub fn box_stats(values: &[f64]) -> Result<BoxStats> {
    let s = sorted_finite(values, "box-plot values")?;
    let (q1, median, q3) = (quantile_sorted(&s, 0.25), quantile_sorted(&s, 0.5), quantile_sorted(&s, 0.75));
    let iqr = q3 - q1;
    let (fence_lo, fence_hi) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    let inside = |v: &&f64| (fence_lo..=fence_hi).contains(*v);
    let whisker_low = *s.iter().find(inside).unwrap_or(&q1);
    let whisker_high = *s.iter().rev().find(inside).unwrap_or(&q3);
    let outliers = s.iter().copied().filter(|v| !(fence_lo..=fence_hi).contains(v)).collect();
    Ok(BoxStats { median, q1, q3, whisker_low, whisker_high, outliers })
}
