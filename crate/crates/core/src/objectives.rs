//! Benchmark objectives with known global minimizers, and a sampling-based
//! check of the growth and inverse-continuity conditions used by the
//! convergence analysis.

use std::f64::consts::{E, PI};

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::{Ensemble, Hyperrectangle};
use crate::error::{check_dim, Error, Result};
use crate::rng::rng_from_seed;

/// Per-coordinate minimizer of the Styblinski–Tang function, i.e. the
/// negative root of `4s^3 - 32s + 5 = 0`.
pub const STYBLINSKI_TANG_ARGMIN: f64 = -2.903_534_027_771_177;

const ACKLEY_A: f64 = 20.0;
const ACKLEY_B: f64 = 0.2;
const RASTRIGIN_A: f64 = 10.0;

/// Batches below this size are evaluated on the calling thread.
const PAR_THRESHOLD: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Benchmark {
    Ackley,
    Rastrigin,
    StyblinskiTang,
    /// `|x|^2`, the model problem of the convergence check.
    Quadratic,
}

impl Benchmark {
    pub const ALL: [Benchmark; 4] =
        [Benchmark::Ackley, Benchmark::Rastrigin, Benchmark::StyblinskiTang, Benchmark::Quadratic];

    pub fn name(self) -> &'static str {
        match self {
            Benchmark::Ackley => "ackley",
            Benchmark::Rastrigin => "rastrigin",
            Benchmark::StyblinskiTang => "styblinski-tang",
            Benchmark::Quadratic => "quadratic",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|b| b.name() == name).ok_or_else(|| Error::UnknownObjective(name.to_string()))
    }

    /// Even functions: `E(x) == E(-x)`.
    pub fn is_symmetric(self) -> bool {
        !matches!(self, Benchmark::StyblinskiTang)
    }

    fn value(self, x: &[f64]) -> f64 {
        match self {
            Benchmark::Ackley => {
                let inv_d = 1.0 / x.len() as f64;
                let sq = x.iter().map(|v| v * v).sum::<f64>() * inv_d;
                let cs = x.iter().map(|v| (2.0 * PI * v).cos()).sum::<f64>() * inv_d;
                // Grouped so that the origin evaluates to exactly zero.
                ACKLEY_A * (1.0 - (-ACKLEY_B * sq.sqrt()).exp()) + (E - cs.exp())
            }
            Benchmark::Rastrigin => x.iter().map(|v| v * v + RASTRIGIN_A * (1.0 - (2.0 * PI * v).cos())).sum(),
            Benchmark::StyblinskiTang => x.iter().map(|v| styblinski_tang_1d(*v)).sum::<f64>(),
            Benchmark::Quadratic => x.iter().map(|v| v * v).sum(),
        }
    }

    fn argmin_coordinate(self) -> f64 {
        match self {
            Benchmark::StyblinskiTang => STYBLINSKI_TANG_ARGMIN,
            _ => 0.0,
        }
    }
}

fn styblinski_tang_1d(v: f64) -> f64 {
    let v2 = v * v;
    0.5 * (v2 * v2 - 16.0 * v2 + 5.0 * v)
}

/// A benchmark bound to a dimension, with its global minimizer stored.
#[derive(Debug, Clone, PartialEq)]
pub struct Objective {
    benchmark: Benchmark,
    dim: usize,
    minimizer: Vec<f64>,
    min_value: f64,
}

impl Objective {
    pub fn new(benchmark: Benchmark, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("objective dimension must be positive".into()));
        }
        let minimizer = vec![benchmark.argmin_coordinate(); dim];
        let min_value = benchmark.value(&minimizer);
        Ok(Self { benchmark, dim, minimizer, min_value })
    }

    pub fn by_name(name: &str, dim: usize) -> Result<Self> {
        Self::new(Benchmark::from_name(name)?, dim)
    }

    pub fn benchmark(&self) -> Benchmark {
        self.benchmark
    }

    pub fn name(&self) -> &'static str {
        self.benchmark.name()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn minimizer(&self) -> &[f64] {
        &self.minimizer
    }

    pub fn min_value(&self) -> f64 {
        self.min_value
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        Ok(self.benchmark.value(x))
    }

    /// Objective value of every row, in row order.
    pub fn batch_evaluate(&self, ens: &Ensemble) -> Result<Vec<f64>> {
        check_dim(self.dim, ens.dim())?;
        let b = self.benchmark;
        let flat = ens.as_flat();
        Ok(if ens.len() >= PAR_THRESHOLD {
            flat.par_chunks_exact(self.dim).map(|r| b.value(r)).collect()
        } else {
            flat.chunks_exact(self.dim).map(|r| b.value(r)).collect()
        })
    }

    /// Evaluates without the dimension check; callers guarantee the length.
    pub(crate) fn value_unchecked(&self, x: &[f64]) -> f64 {
        self.benchmark.value(x)
    }
}

/// Outcome of [`verify_growth_assumptions`].
///
/// A `false` flag means a sampled witness violated the inequality; a `true`
/// flag is evidence only. Reported constants carry a 10% slack in the
/// conservative direction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthReport {
    pub lipschitz_ok: bool,
    pub lipschitz_const: f64,
    pub upper_ok: bool,
    pub upper_const: f64,
    pub lower_ok: bool,
    pub lower_const: f64,
    pub lower_radius: f64,
    pub inverse_ok: bool,
    pub inverse_const: f64,
    pub inverse_exponent: f64,
    pub inverse_radius: f64,
    pub far_gap: f64,
    pub sample_count: usize,
}

const SLACK: f64 = 0.1;

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

/// Checks the local-Lipschitz, quadratic upper/lower growth, and
/// p-conditioning inequalities on sampled points.
///
/// Half of the samples are uniform in `domain`; the other half lie on random
/// rays through the minimizer at log-uniform radii, so the behaviour close to
/// `x*` is resolved even in higher dimension.
pub fn verify_growth_assumptions(
    obj: &Objective,
    domain: &Hyperrectangle,
    n_samples: usize,
    rng_seed: u64,
) -> Result<GrowthReport> {
    check_dim(obj.dim(), domain.dim())?;
    verify_growth_of(|x| obj.value_unchecked(x), obj.minimizer(), domain, n_samples, rng_seed)
}

/// [`verify_growth_assumptions`] for an arbitrary objective with claimed
/// minimizer `xs`.
pub fn verify_growth_of<F: Fn(&[f64]) -> f64>(
    eval: F,
    xs: &[f64],
    domain: &Hyperrectangle,
    n_samples: usize,
    rng_seed: u64,
) -> Result<GrowthReport> {
    check_dim(xs.len(), domain.dim())?;
    if n_samples < 2 {
        return Err(Error::InvalidParameter("need at least two samples".into()));
    }
    let mut rng = rng_from_seed(rng_seed);
    let d = xs.len();
    let e_min = eval(xs);

    let half_width = domain.lower.iter().zip(&domain.upper).map(|(l, u)| 0.5 * (u - l)).fold(f64::INFINITY, f64::min);
    let diameter = dist(&domain.lower, &domain.upper).max(f64::MIN_POSITIVE);
    let inverse_radius = (0.5 * half_width).max(1e-3 * diameter);

    let n_uniform = n_samples - n_samples / 2;
    let mut points: Vec<Vec<f64>> = (0..n_uniform).map(|_| domain.sample(&mut rng)).collect();
    let r_max = inverse_radius.max(diameter);
    let (log_lo, log_hi) = ((1e-4 * inverse_radius).ln(), r_max.ln());
    for _ in n_uniform..n_samples {
        let dir: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let len = norm(&dir).max(f64::MIN_POSITIVE);
        let r = (log_lo + (log_hi - log_lo) * rng.random::<f64>()).exp();
        points.push(xs.iter().zip(&dir).map(|(c, u)| c + r * u / len).collect());
    }
    let gaps: Vec<f64> = points.iter().map(|p| eval(p) - e_min).collect();
    let values: Vec<f64> = gaps.iter().map(|g| g + e_min).collect();

    // Local Lipschitz: neighbours in sample order plus one random partner each.
    let mut lip = 0.0f64;
    for i in 0..points.len() {
        let j = if i + 1 < points.len() { i + 1 } else { 0 };
        let k = rng.random_range(0..points.len());
        for &p in &[j, k] {
            let h = dist(&points[i], &points[p]);
            if h > 0.0 {
                let scale = (1.0 + norm(&points[i]) + norm(&points[p])) * h;
                lip = lip.max((values[i] - values[p]).abs() / scale);
            }
        }
    }
    let lipschitz_ok = lip.is_finite();
    let lipschitz_const = ((1.0 + SLACK) * lip).max(f64::MIN_POSITIVE);

    let upper = points.iter().zip(&gaps).map(|(p, g)| g / (1.0 + norm(p).powi(2))).fold(f64::NEG_INFINITY, f64::max);
    let upper_ok = upper.is_finite();
    let upper_const = ((1.0 + SLACK) * upper).max(f64::MIN_POSITIVE);

    // Lower quadratic growth outside the smallest radius beyond which every
    // sample is strictly above the minimum.
    let mut by_norm: Vec<(f64, f64)> = points.iter().zip(&gaps).map(|(p, g)| (norm(p), *g)).collect();
    by_norm.sort_by(|a, b| a.0.total_cmp(&b.0));
    let last_bad = by_norm.iter().rposition(|&(_, g)| g <= 0.0);
    let lower_radius = match last_bad {
        Some(i) => by_norm[i].0,
        None => 0.0,
    }
    .max(1e-3 * diameter);
    let lower =
        by_norm.iter().filter(|(r, _)| *r > lower_radius).map(|(r, g)| g / (r * r)).fold(f64::INFINITY, f64::min);
    let lower_ok = lower.is_finite() && lower > 0.0;
    let lower_const = if lower_ok { (1.0 - SLACK) * lower } else { 0.0 };

    // p-conditioning: fit the exponent on the samples closest to x*.
    let radial: Vec<(f64, f64)> = points.iter().zip(&gaps).map(|(p, g)| (dist(p, xs), *g)).collect();
    let any_below = gaps.iter().any(|g| *g < 0.0);
    let near: Vec<(f64, f64)> =
        radial.iter().copied().filter(|&(r, g)| r > 0.0 && r <= 1e-2 * inverse_radius && g > 0.0).collect();
    let exponent = if near.len() >= 2 {
        let m = near.len() as f64;
        let (sx, sy) = near.iter().fold((0.0, 0.0), |(a, b), (r, g)| (a + r.ln(), b + g.ln()));
        let (mx, my) = (sx / m, sy / m);
        let (sxy, sxx) = near.iter().fold((0.0, 0.0), |(a, b), (r, g)| {
            let dx = r.ln() - mx;
            (a + dx * (g.ln() - my), b + dx * dx)
        });
        if sxx > 0.0 {
            sxy / sxx
        } else {
            f64::NAN
        }
    } else {
        f64::NAN
    };
    let (mut c_p, mut far) = (f64::INFINITY, f64::INFINITY);
    for &(r, g) in &radial {
        if r <= inverse_radius {
            if r > 0.0 {
                c_p = c_p.min(g / r.powf(exponent));
            }
        } else {
            far = far.min(g);
        }
    }
    let inverse_ok = !any_below
        && exponent.is_finite()
        && exponent > 0.0
        && c_p.is_finite()
        && c_p > 0.0
        && far.is_finite()
        && far > 0.0;
    let (inverse_const, far_gap) = if inverse_ok { ((1.0 - SLACK) * c_p, (1.0 - SLACK) * far) } else { (0.0, 0.0) };

    Ok(GrowthReport {
        lipschitz_ok,
        lipschitz_const,
        upper_ok,
        upper_const,
        lower_ok,
        lower_const,
        lower_radius,
        inverse_ok,
        inverse_const,
        inverse_exponent: if exponent.is_finite() { exponent } else { 0.0 },
        inverse_radius,
        far_gap,
        sample_count: points.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minima_are_exact() {
        for b in Benchmark::ALL {
            for d in [1, 2, 10] {
                let o = Objective::new(b, d).unwrap();
                let v = o.evaluate(o.minimizer()).unwrap();
                assert!((v - o.min_value()).abs() <= 1e-12, "{b:?} d={d}");
            }
        }
        assert_eq!(Objective::by_name("ackley", 1).unwrap().evaluate(&[0.0]).unwrap(), 0.0);
        assert_eq!(Objective::by_name("rastrigin", 10).unwrap().evaluate(&[0.0; 10]).unwrap(), 0.0);
    }

    #[test]
    fn styblinski_tang_minimizer_matches_grid_and_bisection() {
        // Grid search for the bracket, then bisection on the derivative.
        let deriv = |s: f64| 4.0 * s * s * s - 32.0 * s + 5.0;
        let grid: Vec<f64> = (0..=10_000).map(|i| -5.0 + 10.0 * i as f64 / 10_000.0).collect();
        let best =
            grid.iter().copied().min_by(|a, b| styblinski_tang_1d(*a).total_cmp(&styblinski_tang_1d(*b))).unwrap();
        let (mut lo, mut hi) = (best - 1e-3, best + 1e-3);
        assert!(deriv(lo) < 0.0 && deriv(hi) > 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if deriv(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((0.5 * (lo + hi) - STYBLINSKI_TANG_ARGMIN).abs() < 1e-10);
        let o = Objective::by_name("styblinski-tang", 2).unwrap();
        let s = STYBLINSKI_TANG_ARGMIN;
        assert_eq!(o.evaluate(&[s, s]).unwrap(), o.min_value());
        assert!((o.min_value() - 2.0 * -39.166_165_703_771_41).abs() < 1e-10);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let o = Objective::by_name("ackley", 2).unwrap();
        assert_eq!(o.evaluate(&[0.0]), Err(Error::DimensionMismatch { expected: 2, found: 1 }));
        let e = Ensemble::from_rows(&[vec![0.0]]).unwrap();
        assert!(o.batch_evaluate(&e).is_err());
        assert!(Objective::by_name("sphere", 2).is_err());
    }

    #[test]
    fn batch_matches_loop() {
        let o = Objective::by_name("rastrigin", 3).unwrap();
        let b = Hyperrectangle::cube(3, -2.0, 2.0).unwrap();
        for n in [1, 2, 10, 5000] {
            let e = Ensemble::uniform(n, &b, &mut rng_from_seed(n as u64)).unwrap();
            let v = o.batch_evaluate(&e).unwrap();
            let looped: Vec<f64> = e.rows().map(|r| o.evaluate(r).unwrap()).collect();
            assert_eq!(v, looped);
        }
        let at_min = Ensemble::from_rows(&[o.minimizer().to_vec()]).unwrap();
        assert_eq!(o.batch_evaluate(&at_min).unwrap(), vec![o.min_value()]);
    }

    #[test]
    fn shift_and_symmetry() {
        let mut rng = rng_from_seed(11);
        for b in Benchmark::ALL {
            let o = Objective::new(b, 4).unwrap();
            let dom = Hyperrectangle::cube(4, -2.0, 2.0).unwrap();
            for _ in 0..100_000 / 4 {
                let x = dom.sample(&mut rng);
                let v = o.evaluate(&x).unwrap();
                assert!(v - o.min_value() >= 0.0);
                if b.is_symmetric() {
                    let neg: Vec<f64> = x.iter().map(|v| -v).collect();
                    assert!((o.evaluate(&neg).unwrap() - v).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn quadratic_inverse_continuity_is_tight() {
        let o = Objective::new(Benchmark::Quadratic, 1).unwrap();
        let dom = Hyperrectangle::cube(1, -2.0, 2.0).unwrap();
        let r = verify_growth_assumptions(&o, &dom, 2000, 5).unwrap();
        assert!(r.inverse_ok);
        assert!((r.inverse_exponent - 2.0).abs() < 1e-6, "{}", r.inverse_exponent);
        assert!((r.inverse_const / (1.0 - SLACK) - 1.0).abs() < 1e-6, "{}", r.inverse_const);
    }

    #[test]
    fn ackley_satisfies_every_growth_condition() {
        let o = Objective::new(Benchmark::Ackley, 1).unwrap();
        let dom = Hyperrectangle::cube(1, -2.0, 2.0).unwrap();
        let r = verify_growth_assumptions(&o, &dom, 10_000, 11).unwrap();
        assert!(r.lipschitz_ok && r.upper_ok && r.lower_ok && r.inverse_ok, "{r:?}");
        // Near 0 the gap is 4|x| + 50x^2 + ..., so the fitted exponent sits
        // just above 1 on the fit window.
        assert!((1.0..1.1).contains(&r.inverse_exponent), "{}", r.inverse_exponent);
        // Dense-grid oracle: the reported constants hold on every grid point.
        for i in 0..=10_000 {
            let x = -2.0 + 4.0 * i as f64 / 10_000.0;
            let gap = o.evaluate(&[x]).unwrap();
            assert!(gap <= r.upper_const * (1.0 + x * x) + 1e-12, "upper at {x}");
            if x.abs() <= r.inverse_radius {
                assert!(gap >= r.inverse_const * x.abs().powf(r.inverse_exponent) - 1e-12, "inverse at {x}");
            } else {
                assert!(gap >= r.far_gap * (1.0 - SLACK), "far gap at {x}");
            }
            if x.abs() > r.lower_radius {
                assert!(gap >= r.lower_const * x * x - 1e-12, "lower at {x}");
            }
        }
    }

    #[test]
    fn constant_objective_fails_inverse_continuity() {
        let dom = Hyperrectangle::cube(1, -2.0, 2.0).unwrap();
        let r = verify_growth_of(|_| 3.5, &[0.0], &dom, 1000, 2).unwrap();
        assert!(!r.inverse_ok);
        assert!(!r.lower_ok);
        assert!(r.lipschitz_ok && r.upper_ok);
        assert!(r.lipschitz_const > 0.0 && r.upper_const > 0.0);
    }

    #[test]
    fn deterministic_given_seed() {
        let o = Objective::by_name("ackley", 2).unwrap();
        let dom = Hyperrectangle::cube(2, -2.0, 2.0).unwrap();
        let a = verify_growth_assumptions(&o, &dom, 500, 9).unwrap();
        let b = verify_growth_assumptions(&o, &dom, 500, 9).unwrap();
        assert_eq!(a, b);
        assert!(verify_growth_assumptions(&o, &dom, 1, 9).is_err());
    }
}
