//! One-generation transition operators.
//!
//! Random draws are consumed from the run's single stream in a fixed order:
//! particles are visited by index and, for each particle, the replacement
//! coin comes first, then the parent indices, then the `d` Gaussian
//! mutation components. A particle that keeps its position draws nothing
//! beyond its coin.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::ensemble::Ensemble;
use crate::error::{check_dim, Error, Result};
use crate::objectives::Objective;
use crate::selection::{argmin, selection_weights, weighted_mean, ParentSampler, SelectionKernel};

/// Mutation strength as a function of the generation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SigmaSchedule {
    Constant,
    /// `sigma_k = sigma0 * factor^k`.
    Geometric(f64),
}

pub fn schedule_sigma(schedule: SigmaSchedule, sigma0: f64, k: u64) -> f64 {
    match schedule {
        SigmaSchedule::Constant => sigma0,
        SigmaSchedule::Geometric(c) => sigma0 * c.powf(k as f64),
    }
}

/// Mutation diffusion vector `D`.
///
/// For the GA step the reference pair is the two parents `(x, x*)`; for
/// the CBO step it is the particle and the weighted mean `(x, m^alpha)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Diffusion {
    /// Fixed vector, non-degenerate when all entries are nonzero.
    Constant(Vec<f64>),
    /// `D = x* - x` componentwise.
    Anisotropic,
    /// `D = |x* - x| (1, ..., 1)`.
    Isotropic,
}

impl Diffusion {
    pub fn name(&self) -> &'static str {
        match self {
            Diffusion::Constant(_) => "constant",
            Diffusion::Anisotropic => "anisotropic",
            Diffusion::Isotropic => "isotropic",
        }
    }

    fn fill(&self, x: &[f64], target: &[f64], out: &mut [f64]) {
        match self {
            Diffusion::Constant(v) => out.copy_from_slice(v),
            Diffusion::Anisotropic => {
                for ((o, a), b) in out.iter_mut().zip(x).zip(target) {
                    *o = b - a;
                }
            }
            Diffusion::Isotropic => {
                let r = x.iter().zip(target).map(|(a, b)| (b - a) * (b - a)).sum::<f64>().sqrt();
                out.iter_mut().for_each(|o| *o = r);
            }
        }
    }
}

/// Full configuration of one GA/CBO run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicsParams {
    /// Newborn fraction per generation, in `(0, 1]`.
    pub tau: f64,
    /// Crossover vector in `[0, 1]^d`.
    pub gamma: Vec<f64>,
    /// Scaling parameter in `[tau, 1]`.
    pub epsilon: f64,
    /// CBO drift strength.
    pub lambda: f64,
    pub alpha: f64,
    pub sigma0: f64,
    pub schedule: SigmaSchedule,
    pub diffusion: Diffusion,
    pub n: usize,
    pub k_max: u64,
    pub seed: u64,
}

impl DynamicsParams {
    pub fn dim(&self) -> usize {
        self.gamma.len()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return bad(format!("tau must lie in (0, 1], got {}", self.tau));
        }
        if !(self.epsilon <= 1.0) {
            return bad(format!("epsilon must be at most 1, got {}", self.epsilon));
        }
        if !(self.tau <= self.epsilon) {
            return bad("tau ≤ epsilon required".to_string());
        }
        if self.gamma.is_empty() {
            return bad("gamma must have at least one component".into());
        }
        if self.gamma.iter().any(|g| !(0.0..=1.0).contains(g)) {
            return bad("gamma must lie in [0, 1] componentwise".into());
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad(format!("lambda must be nonnegative, got {}", self.lambda));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad(format!("alpha must be positive, got {}", self.alpha));
        }
        if !(self.sigma0 >= 0.0 && self.sigma0.is_finite()) {
            return bad(format!("sigma0 must be nonnegative, got {}", self.sigma0));
        }
        if let SigmaSchedule::Geometric(c) = self.schedule {
            if !(c > 0.0 && c < 1.0) {
                return bad(format!("cooling factor must lie in (0, 1), got {c}"));
            }
        }
        if let Diffusion::Constant(v) = &self.diffusion {
            check_dim(self.gamma.len(), v.len())?;
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite("diffusion vector"));
            }
        }
        if self.n == 0 {
            return bad("population size must be positive".into());
        }
        Ok(())
    }
}

/// Current mutation strength `sigma_k` along a schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MutationState {
    sigma0: f64,
    schedule: SigmaSchedule,
    k: u64,
    sigma_k: f64,
}

impl MutationState {
    pub fn new(sigma0: f64, schedule: SigmaSchedule) -> Self {
        Self { sigma0, schedule, k: 0, sigma_k: sigma0 }
    }

    pub fn from_params(p: &DynamicsParams) -> Self {
        Self::new(p.sigma0, p.schedule)
    }

    pub fn sigma(&self) -> f64 {
        self.sigma_k
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn advance(&mut self) {
        self.k += 1;
        self.sigma_k = schedule_sigma(self.schedule, self.sigma0, self.k);
    }
}

/// Offspring `x + gamma ⊙ (x* - x) + sigma D ⊙ xi`, i.e. the convex blend
/// `(1 - gamma) ⊙ x + gamma ⊙ x*` plus mutation.
pub fn crossover_mutate(
    x: &[f64],
    x_star: &[f64],
    gamma: &[f64],
    sigma: f64,
    diffusion: &[f64],
    xi: &[f64],
) -> Result<Vec<f64>> {
    let d = x.len();
    for len in [x_star.len(), gamma.len(), diffusion.len(), xi.len()] {
        check_dim(d, len)?;
    }
    let mut out = vec![0.0; d];
    blend_into(x, x_star, gamma, 1.0, sigma, diffusion, xi, &mut out);
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
#[inline]
fn blend_into(
    x: &[f64],
    x_star: &[f64],
    gamma: &[f64],
    gamma_scale: f64,
    sigma: f64,
    diffusion: &[f64],
    xi: &[f64],
    out: &mut [f64],
) {
    for j in 0..out.len() {
        out[j] = x[j] + gamma_scale * gamma[j] * (x_star[j] - x[j]) + sigma * diffusion[j] * xi[j];
    }
}

fn fill_normal<R: Rng + ?Sized>(rng: &mut R, xi: &mut [f64]) {
    xi.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
}

fn check_shapes(ens: &Ensemble, params: &DynamicsParams, obj: &Objective) -> Result<()> {
    check_dim(obj.dim(), ens.dim())?;
    check_dim(params.dim(), ens.dim())
}

/// One GA generation under the quasi-invariant scaling with parameter
/// `epsilon`.
///
/// Each particle is replaced with probability `tau / epsilon`, otherwise it
/// is kept in place. A newborn is the offspring of a parent pair drawn from
/// `kernel` over the current generation, with crossover `epsilon * gamma`
/// and mutation strength `sqrt(epsilon) * sigma_k`. With the CBO kernel the
/// first parent is the particle itself. `epsilon = 1` is the unscaled chain.
pub fn ga_step<R: Rng + ?Sized>(
    ens: &Ensemble,
    params: &DynamicsParams,
    kernel: &SelectionKernel,
    obj: &Objective,
    mutation: &MutationState,
    rng: &mut R,
) -> Result<Ensemble> {
    check_shapes(ens, params, obj)?;
    let values = obj.batch_evaluate(ens)?;
    ga_step_with_values(ens, &values, params, kernel, mutation.sigma(), rng)
}

pub(crate) fn ga_step_with_values<R: Rng + ?Sized>(
    ens: &Ensemble,
    values: &[f64],
    params: &DynamicsParams,
    kernel: &SelectionKernel,
    sigma: f64,
    rng: &mut R,
) -> Result<Ensemble> {
    let weights = selection_weights(kernel, values)?;
    let sampler = ParentSampler::new(&weights);
    let self_first = matches!(kernel, SelectionKernel::CboAsymmetric { .. });
    let rate = params.tau / params.epsilon;
    let eff_sigma = params.epsilon.sqrt() * sigma;
    let d = ens.dim();

    let mut next = ens.as_flat().to_vec();
    let mut xi = vec![0.0; d];
    let mut dvec = vec![0.0; d];
    for i in 0..ens.len() {
        if rng.random::<f64>() >= rate {
            continue;
        }
        let a = if self_first { i } else { sampler.first(rng) };
        let b = sampler.second(rng);
        fill_normal(rng, &mut xi);
        let (x, x_star) = (ens.row(a), ens.row(b));
        params.diffusion.fill(x, x_star, &mut dvec);
        blend_into(x, x_star, &params.gamma, params.epsilon, eff_sigma, &dvec, &xi, &mut next[i * d..(i + 1) * d]);
    }
    Ok(ens.successor(next))
}

/// One CBO iteration: every particle drifts towards the weighted mean,
/// `x + tau lambda (m^alpha - x) + sqrt(tau) sigma_k D ⊙ xi`.
pub fn cbo_step<R: Rng + ?Sized>(
    ens: &Ensemble,
    params: &DynamicsParams,
    obj: &Objective,
    mutation: &MutationState,
    rng: &mut R,
) -> Result<Ensemble> {
    check_shapes(ens, params, obj)?;
    let values = obj.batch_evaluate(ens)?;
    cbo_step_with_values(ens, &values, params, mutation.sigma(), rng)
}

pub(crate) fn cbo_step_with_values<R: Rng + ?Sized>(
    ens: &Ensemble,
    values: &[f64],
    params: &DynamicsParams,
    sigma: f64,
    rng: &mut R,
) -> Result<Ensemble> {
    let m = weighted_mean(ens, values, params.alpha)?;
    let d = ens.dim();
    let drift = params.tau * params.lambda;
    let noise = params.tau.sqrt() * sigma;
    let mut next = vec![0.0; ens.len() * d];
    let mut xi = vec![0.0; d];
    let mut dvec = vec![0.0; d];
    for (i, x) in ens.rows().enumerate() {
        fill_normal(rng, &mut xi);
        params.diffusion.fill(x, &m, &mut dvec);
        for j in 0..d {
            next[i * d + j] = x[j] + drift * (m[j] - x[j]) + noise * dvec[j] * xi[j];
        }
    }
    Ok(ens.successor(next))
}

/// Parameters of the kinetic binary (KBO) collision.
#[derive(Debug, Clone, PartialEq)]
pub struct KboParams {
    pub lambda: f64,
    pub sigma: f64,
    pub alpha: f64,
    pub diffusion: Diffusion,
}

/// Blend weight `gamma(x, x*) = e^{-a E(x*)} / (e^{-a E(x)} + e^{-a E(x*)})`,
/// evaluated as a logistic of the objective gap.
pub fn kbo_weight(value_x: f64, value_star: f64, alpha: f64) -> f64 {
    let z = alpha * (value_x - value_star);
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// One KBO sweep: particles are paired by a uniform random permutation and
/// each pair collides symmetrically. With odd `N` the particle left over at
/// the end of the permutation keeps its position.
pub fn kbo_step<R: Rng + ?Sized>(ens: &Ensemble, params: &KboParams, obj: &Objective, rng: &mut R) -> Result<Ensemble> {
    check_dim(obj.dim(), ens.dim())?;
    if !(params.lambda >= 0.0 && params.lambda <= 1.0) {
        return Err(Error::InvalidParameter(format!("lambda must lie in [0, 1], got {}", params.lambda)));
    }
    if !(params.alpha > 0.0) || !(params.sigma >= 0.0) {
        return Err(Error::InvalidParameter("alpha must be positive and sigma nonnegative".into()));
    }
    if let Diffusion::Constant(v) = &params.diffusion {
        check_dim(ens.dim(), v.len())?;
    }
    let values = obj.batch_evaluate(ens)?;
    let d = ens.dim();
    let mut order: Vec<usize> = (0..ens.len()).collect();
    order.shuffle(rng);

    let mut next = ens.as_flat().to_vec();
    let mut xi = vec![0.0; d];
    let mut dvec = vec![0.0; d];
    for pair in order.chunks_exact(2) {
        let (a, b) = (pair[0], pair[1]);
        for (me, other) in [(a, b), (b, a)] {
            let w = params.lambda * kbo_weight(values[me], values[other], params.alpha);
            fill_normal(rng, &mut xi);
            let (x, y) = (ens.row(me), ens.row(other));
            params.diffusion.fill(x, y, &mut dvec);
            for j in 0..d {
                next[me * d + j] = x[j] + w * (y[j] - x[j]) + params.sigma * dvec[j] * xi[j];
            }
        }
    }
    Ok(ens.successor(next))
}

/// Which update rule a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Method {
    /// GA chain with scaling parameter `epsilon`.
    Ga {
        epsilon: f64,
    },
    Cbo,
}

impl Method {
    pub fn tag(&self) -> String {
        match self {
            Method::Ga { epsilon } => format!("ga-{epsilon}"),
            Method::Cbo => "cbo".to_string(),
        }
    }
}

/// A run in progress: the current generation with its cached objective
/// values, the mutation schedule and the run's random stream.
#[derive(Debug, Clone)]
pub struct Run<R> {
    ensemble: Ensemble,
    values: Vec<f64>,
    params: DynamicsParams,
    kernel: SelectionKernel,
    method: Method,
    objective: Objective,
    mutation: MutationState,
    rng: R,
}

impl<R: Rng> Run<R> {
    /// Starts a run; for GA methods the method's `epsilon` overrides the one
    /// in `params`.
    pub fn new(
        ensemble: Ensemble,
        mut params: DynamicsParams,
        kernel: SelectionKernel,
        method: Method,
        objective: Objective,
        rng: R,
    ) -> Result<Self> {
        if let Method::Ga { epsilon } = method {
            params.epsilon = epsilon;
        }
        params.validate()?;
        kernel.validate()?;
        check_shapes(&ensemble, &params, &objective)?;
        let values = objective.batch_evaluate(&ensemble)?;
        let mutation = MutationState::from_params(&params);
        Ok(Self { ensemble, values, params, kernel, method, objective, mutation, rng })
    }

    pub fn ensemble(&self) -> &Ensemble {
        &self.ensemble
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn objective(&self) -> &Objective {
        &self.objective
    }

    pub fn mutation(&self) -> &MutationState {
        &self.mutation
    }

    pub fn generation(&self) -> u64 {
        self.ensemble.generation()
    }

    /// Index of the current best particle (lowest index on ties).
    pub fn best(&self) -> usize {
        argmin(&self.values)
    }

    pub fn step(&mut self) -> Result<()> {
        let sigma = self.mutation.sigma();
        let next = match self.method {
            Method::Ga { .. } => {
                ga_step_with_values(&self.ensemble, &self.values, &self.params, &self.kernel, sigma, &mut self.rng)?
            }
            Method::Cbo => cbo_step_with_values(&self.ensemble, &self.values, &self.params, sigma, &mut self.rng)?,
        };
        self.values = self.objective.batch_evaluate(&next)?;
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("objective values after step"));
        }
        self.ensemble = next;
        self.mutation.advance();
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::Hyperrectangle;
    use crate::rng::rng_from_seed;

    fn params(d: usize) -> DynamicsParams {
        DynamicsParams {
            tau: 0.1,
            gamma: vec![0.2; d],
            epsilon: 1.0,
            lambda: 1.0,
            alpha: 10.0,
            sigma0: 0.1,
            schedule: SigmaSchedule::Constant,
            diffusion: Diffusion::Constant(vec![1.0; d]),
            n: 10,
            k_max: 10,
            seed: 0,
        }
    }

    #[test]
    fn crossover_examples() {
        let xi = [0.7, -1.3];
        assert_eq!(
            crossover_mutate(&[1.0, 2.0], &[5.0, 6.0], &[0.0, 0.0], 0.0, &[1.0; 2], &xi).unwrap(),
            vec![1.0, 2.0]
        );
        assert_eq!(
            crossover_mutate(&[1.0, 2.0], &[5.0, 6.0], &[1.0, 1.0], 0.0, &[1.0; 2], &xi).unwrap(),
            vec![5.0, 6.0]
        );
        assert_eq!(crossover_mutate(&[0.0], &[2.0], &[0.5], 0.0, &[1.0], &[0.3]).unwrap(), vec![1.0]);
        // Parent difference vanishes when both parents coincide.
        let x = [0.37, -1.1];
        let mut d = [0.0; 2];
        Diffusion::Anisotropic.fill(&x, &x, &mut d);
        assert_eq!(crossover_mutate(&x, &x, &[0.3, 0.9], 5.0, &d, &xi).unwrap(), x.to_vec());
        assert!(crossover_mutate(&x, &x, &[0.3], 5.0, &d, &xi).is_err());
        assert_eq!(
            crossover_mutate(&[0.0, 0.0], &[0.0, 0.0], &[0.5, 0.5], 2.0, &[1.0, 3.0], &[1.0, -1.0]).unwrap(),
            vec![2.0, -6.0]
        );
    }

    #[test]
    fn schedules() {
        assert_eq!(schedule_sigma(SigmaSchedule::Constant, 0.1, 1_000_000), 0.1);
        assert!((schedule_sigma(SigmaSchedule::Geometric(0.95), 0.1, 1) - 0.095).abs() < 1e-15);
        assert_eq!(schedule_sigma(SigmaSchedule::Geometric(0.95), 0.1, 0), 0.1);
        let mut m = MutationState::new(0.1, SigmaSchedule::Geometric(0.5));
        m.advance();
        m.advance();
        assert_eq!((m.k(), m.sigma()), (2, 0.025));
    }

    #[test]
    fn validation() {
        let mut p = params(1);
        p.tau = 0.5;
        p.epsilon = 0.1;
        assert_eq!(p.validate(), Err(Error::InvalidParameter("tau ≤ epsilon required".into())));
        let mut p = params(1);
        p.gamma = vec![1.5];
        assert!(p.validate().is_err());
        let mut p = params(2);
        p.diffusion = Diffusion::Constant(vec![1.0]);
        assert!(p.validate().is_err());
        assert!(params(3).validate().is_ok());
    }

    #[test]
    fn epsilon_equal_tau_replaces_everyone() {
        let obj = Objective::by_name("ackley", 1).unwrap();
        let b = Hyperrectangle::cube(1, -2.0, 2.0).unwrap();
        let e = Ensemble::uniform(200, &b, &mut rng_from_seed(1)).unwrap();
        let mut p = params(1);
        p.epsilon = p.tau;
        let k = SelectionKernel::Boltzmann { alpha: 1.0 };
        let next = ga_step(&e, &p, &k, &obj, &MutationState::from_params(&p), &mut rng_from_seed(2)).unwrap();
        assert!(e.rows().zip(next.rows()).all(|(a, b)| a != b));
        assert_eq!(next.generation(), 1);
    }

    #[test]
    fn cbo_kernel_without_drift_or_noise_is_identity() {
        let obj = Objective::by_name("rastrigin", 3).unwrap();
        let b = Hyperrectangle::cube(3, -2.0, 2.0).unwrap();
        let e = Ensemble::uniform(50, &b, &mut rng_from_seed(5)).unwrap();
        let mut p = params(3);
        p.gamma = vec![0.0; 3];
        p.sigma0 = 0.0;
        p.epsilon = p.tau;
        let k = SelectionKernel::CboAsymmetric { alpha: 5.0 };
        let next = ga_step(&e, &p, &k, &obj, &MutationState::from_params(&p), &mut rng_from_seed(6)).unwrap();
        assert_eq!(next.as_flat(), e.as_flat());
    }

    #[test]
    fn single_particle_is_fixed() {
        let obj = Objective::by_name("ackley", 2).unwrap();
        let e = Ensemble::from_rows(&[vec![0.4, -0.9]]).unwrap();
        let mut p = params(2);
        p.sigma0 = 0.0;
        p.gamma = vec![0.8, 0.3];
        p.tau = 1.0;
        let mut rng = rng_from_seed(3);
        for k in [SelectionKernel::Rank, SelectionKernel::Boltzmann { alpha: 3.0 }] {
            let next = ga_step(&e, &p, &k, &obj, &MutationState::from_params(&p), &mut rng).unwrap();
            assert_eq!(next.as_flat(), e.as_flat());
        }
    }

    #[test]
    fn ga_step_rejects_mismatch() {
        let obj = Objective::by_name("ackley", 2).unwrap();
        let e = Ensemble::from_rows(&[vec![0.4]]).unwrap();
        let p = params(1);
        let k = SelectionKernel::Rank;
        assert!(ga_step(&e, &p, &k, &obj, &MutationState::from_params(&p), &mut rng_from_seed(0)).is_err());
    }

    #[test]
    fn cbo_consensus_and_full_contraction() {
        let obj = Objective::by_name("ackley", 2).unwrap();
        let e = Ensemble::from_rows(&vec![vec![0.3, -0.2]; 6]).unwrap();
        let mut p = params(2);
        p.diffusion = Diffusion::Anisotropic;
        p.sigma0 = 3.0;
        let next = cbo_step(&e, &p, &obj, &MutationState::from_params(&p), &mut rng_from_seed(1)).unwrap();
        assert_eq!(next.as_flat(), e.as_flat());

        let b = Hyperrectangle::cube(2, -2.0, 2.0).unwrap();
        let e = Ensemble::uniform(40, &b, &mut rng_from_seed(2)).unwrap();
        let mut p = params(2);
        p.tau = 1.0;
        p.epsilon = 1.0;
        p.sigma0 = 0.0;
        let values = obj.batch_evaluate(&e).unwrap();
        let m = weighted_mean(&e, &values, p.alpha).unwrap();
        let next = cbo_step(&e, &p, &obj, &MutationState::from_params(&p), &mut rng_from_seed(3)).unwrap();
        for r in next.rows() {
            assert!((r[0] - m[0]).abs() < 1e-12 && (r[1] - m[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn cbo_particle_at_mean_gets_no_noise() {
        let obj = Objective::by_name("quadratic", 1).unwrap();
        // Huge alpha: the mean is the best row, which then sits exactly at m.
        let e = Ensemble::from_rows(&[vec![0.0], vec![1.0], vec![-1.5]]).unwrap();
        let mut p = params(1);
        p.alpha = 1e4;
        p.sigma0 = 10.0;
        p.diffusion = Diffusion::Anisotropic;
        let next = cbo_step(&e, &p, &obj, &MutationState::from_params(&p), &mut rng_from_seed(9)).unwrap();
        assert_eq!(next.row(0), &[0.0]);
        assert_ne!(next.row(1), &[1.0]);
    }

    #[test]
    fn kbo_weights() {
        assert_eq!(kbo_weight(2.0, 2.0, 7.0), 0.5);
        assert!(kbo_weight(1.0, 0.0, 1e6) > 1.0 - 1e-15);
        assert!(kbo_weight(0.0, 1.0, 1e6) < 1e-15);
        let (a, b) = (kbo_weight(0.3, 1.1, 2.0), kbo_weight(1.1, 0.3, 2.0));
        assert!((a + b - 1.0).abs() < 1e-15);
    }

    #[test]
    fn kbo_identity_and_hull() {
        let obj = Objective::by_name("ackley", 2).unwrap();
        let b = Hyperrectangle::cube(2, -2.0, 2.0).unwrap();
        let e = Ensemble::uniform(31, &b, &mut rng_from_seed(4)).unwrap();
        let still = KboParams { lambda: 0.0, sigma: 0.0, alpha: 5.0, diffusion: Diffusion::Constant(vec![1.0; 2]) };
        let next = kbo_step(&e, &still, &obj, &mut rng_from_seed(5)).unwrap();
        assert_eq!(next.as_flat(), e.as_flat());
        assert_eq!(next.len(), e.len());

        let blend = KboParams { lambda: 0.9, sigma: 0.0, alpha: 5.0, diffusion: Diffusion::Anisotropic };
        let next = kbo_step(&e, &blend, &obj, &mut rng_from_seed(5)).unwrap();
        // Every moved row sits on the segment to exactly one other input row.
        let mut unchanged = 0;
        for i in 0..e.len() {
            let (x, y) = (e.row(i), next.row(i));
            if x == y {
                unchanged += 1;
                continue;
            }
            let on_segment = (0..e.len()).filter(|&j| j != i).any(|j| {
                let z = e.row(j);
                let t = (y[0] - x[0]) / (z[0] - x[0]);
                (0.0..=1.0).contains(&t) && (x[1] + t * (z[1] - x[1]) - y[1]).abs() < 1e-12
            });
            assert!(on_segment, "row {i}");
        }
        assert!(unchanged <= 1);
        assert!(kbo_step(&e, &KboParams { lambda: 1.5, ..blend }, &obj, &mut rng_from_seed(5)).is_err());
    }

    #[test]
    fn run_is_deterministic() {
        let obj = Objective::by_name("rastrigin", 2).unwrap();
        let b = Hyperrectangle::cube(2, -2.0, 2.0).unwrap();
        let go = |seed| {
            let mut rng = rng_from_seed(seed);
            let e = Ensemble::uniform(64, &b, &mut rng).unwrap();
            let mut run =
                Run::new(e, params(2), SelectionKernel::Rank, Method::Ga { epsilon: 0.3 }, obj.clone(), rng).unwrap();
            for _ in 0..20 {
                run.step().unwrap();
            }
            (run.ensemble().as_flat().to_vec(), run.generation())
        };
        assert_eq!(go(1), go(1));
        assert_ne!(go(1).0, go(2).0);
        assert_eq!(go(1).1, 20);
    }
}
