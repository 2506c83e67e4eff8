//! Parent selection as sampling from explicit discrete distributions over
//! the current generation.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ensemble::Ensemble;
use crate::error::{check_dim, Error, Result};

/// Fitness map `g` for roulette-wheel selection. Both are positive and
/// non-increasing in the objective value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "fitness", rename_all = "kebab-case")]
pub enum Fitness {
    /// `g(v) = exp(-alpha v)`.
    Exponential { alpha: f64 },
    /// `g(v) = 1 / (1 + max(0, v - v_min))`.
    Reciprocal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SelectionKernel {
    RouletteWheel(Fitness),
    Boltzmann {
        alpha: f64,
    },
    Rank,
    /// First parent drawn uniformly, second from the Gibbs weights.
    CboAsymmetric {
        alpha: f64,
    },
}

impl SelectionKernel {
    pub fn name(&self) -> &'static str {
        match self {
            SelectionKernel::RouletteWheel(_) => "roulette",
            SelectionKernel::Boltzmann { .. } => "boltzmann",
            SelectionKernel::Rank => "rank",
            SelectionKernel::CboAsymmetric { .. } => "cbo",
        }
    }

    pub fn alpha(&self) -> Option<f64> {
        match *self {
            SelectionKernel::Boltzmann { alpha }
            | SelectionKernel::CboAsymmetric { alpha }
            | SelectionKernel::RouletteWheel(Fitness::Exponential { alpha }) => Some(alpha),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.alpha() {
            Some(a) if !(a.is_finite() && a > 0.0) => {
                Err(Error::InvalidParameter(format!("alpha must be positive and finite, got {a}")))
            }
            _ => Ok(()),
        }
    }
}

/// Marginals of the parents' measure over particle indices.
#[derive(Debug, Clone, PartialEq)]
pub struct ParentWeights {
    pub first: Vec<f64>,
    pub second: Vec<f64>,
}

fn check_values(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Empty("objective values"));
    }
    let mut min = f64::INFINITY;
    for &v in values {
        if !v.is_finite() {
            return Err(Error::NonFinite("objective values"));
        }
        min = min.min(v);
    }
    Ok(min)
}

fn normalize(mut w: Vec<f64>) -> Vec<f64> {
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
    w
}

/// Unnormalized Gibbs weights `exp(-alpha (v - v_min))`. The minimum maps
/// to `exp(0) = 1`, so the total is at least one and never underflows.
fn gibbs_unnormalized(values: &[f64], v_min: f64, alpha: f64) -> Vec<f64> {
    values.iter().map(|v| (-alpha * (v - v_min)).exp()).collect()
}

/// Normalized Boltzmann–Gibbs weights at inverse temperature `alpha`.
pub fn gibbs_weights(values: &[f64], alpha: f64) -> Result<Vec<f64>> {
    let v_min = check_values(values)?;
    Ok(normalize(gibbs_unnormalized(values, v_min, alpha)))
}

/// Rank weights: particle `i` gets `#{j : v_i <= v_j}`, normalized. Ties
/// share a rank.
pub fn rank_weights(values: &[f64]) -> Result<Vec<f64>> {
    check_values(values)?;
    let n = values.len();
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let counts: Vec<f64> = values.iter().map(|v| (n - sorted.partition_point(|s| s < v)) as f64).collect();
    Ok(normalize(counts))
}

pub fn selection_weights(kernel: &SelectionKernel, values: &[f64]) -> Result<ParentWeights> {
    kernel.validate()?;
    let v_min = check_values(values)?;
    let w = match *kernel {
        SelectionKernel::RouletteWheel(Fitness::Exponential { alpha }) | SelectionKernel::Boltzmann { alpha } => {
            normalize(gibbs_unnormalized(values, v_min, alpha))
        }
        SelectionKernel::RouletteWheel(Fitness::Reciprocal) => {
            normalize(values.iter().map(|v| 1.0 / (1.0 + (v - v_min).max(0.0))).collect())
        }
        SelectionKernel::Rank => rank_weights(values)?,
        SelectionKernel::CboAsymmetric { alpha } => {
            let n = values.len();
            return Ok(ParentWeights {
                first: vec![1.0 / n as f64; n],
                second: normalize(gibbs_unnormalized(values, v_min, alpha)),
            });
        }
    };
    Ok(ParentWeights { first: w.clone(), second: w })
}

/// Index of the smallest value; the lowest index wins ties.
pub fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v < values[best] {
            best = i;
        }
    }
    best
}

/// Cumulative-sum table over nonnegative weights; one uniform and a binary
/// search per draw.
#[derive(Debug, Clone)]
pub struct DiscreteSampler {
    cdf: Vec<f64>,
}

impl DiscreteSampler {
    pub fn new(weights: &[f64]) -> Self {
        let mut acc = 0.0;
        let cdf = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        Self { cdf }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = *self.cdf.last().expect("sampler over an empty table");
        let u = rng.random::<f64>() * total;
        let i = self.cdf.partition_point(|c| *c <= u);
        // u can round up to `total`; fall back to the last positive entry.
        if i < self.cdf.len() {
            i
        } else {
            self.cdf.iter().rposition(|c| *c < total).map_or(0, |j| j + 1)
        }
    }
}

/// Samplers for both marginals of a [`ParentWeights`].
#[derive(Debug, Clone)]
pub struct ParentSampler {
    first: DiscreteSampler,
    second: DiscreteSampler,
}

impl ParentSampler {
    pub fn new(weights: &ParentWeights) -> Self {
        Self { first: DiscreteSampler::new(&weights.first), second: DiscreteSampler::new(&weights.second) }
    }

    pub fn first<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.first.sample(rng)
    }

    pub fn second<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.second.sample(rng)
    }
}

/// `count` i.i.d. parent index pairs; the two indices are independent and
/// may coincide.
pub fn sample_parent_pairs<R: Rng + ?Sized>(weights: &ParentWeights, count: usize, rng: &mut R) -> Vec<(usize, usize)> {
    let s = ParentSampler::new(weights);
    (0..count)
        .map(|_| {
            let a = s.first(rng);
            (a, s.second(rng))
        })
        .collect()
}

/// Gibbs-weighted mean `m^alpha` of the rows.
///
/// Accumulated as offsets from the best row, so a single dominant weight
/// returns that row exactly and a consensus ensemble returns its common
/// position exactly.
pub fn weighted_mean(ens: &Ensemble, values: &[f64], alpha: f64) -> Result<Vec<f64>> {
    check_dim(ens.len(), values.len())?;
    let v_min = check_values(values)?;
    let w = gibbs_unnormalized(values, v_min, alpha);
    Ok(weighted_mean_from(ens, &w, argmin(values)))
}

pub(crate) fn weighted_mean_from(ens: &Ensemble, w: &[f64], best: usize) -> Vec<f64> {
    let anchor = ens.row(best);
    let mut acc = vec![0.0; ens.dim()];
    let mut total = 0.0;
    for (row, &wi) in ens.rows().zip(w) {
        total += wi;
        if wi > 0.0 {
            for ((a, x), c) in acc.iter_mut().zip(row).zip(anchor) {
                *a += wi * (x - c);
            }
        }
    }
    anchor.iter().zip(&acc).map(|(c, a)| c + a / total).collect()
}
