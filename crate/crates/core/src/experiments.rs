//! Seeded, repeatable harnesses for the four numerical studies: finite-N
//! distance to a large reference population, steady states, the GA to CBO
//! scaling comparison, and the decay of the mean towards the minimizer.
//!
//! Every independent run draws its seed from [`derive_seed`] with a path
//! that names its coordinates in the sweep, so results do not depend on
//! the order (or the thread) in which cells execute.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{Diffusion, DynamicsParams, Method, Run, SigmaSchedule};
use crate::ensemble::{Ensemble, Hyperrectangle};
use crate::error::{Error, Result};
use crate::measures::{box_stats, ensemble_stats, histogram, quantile_sorted, wasserstein1_sorted};
use crate::objectives::Objective;
use crate::rng::{derive_seed, rng_from_seed};
use crate::selection::SelectionKernel;

const ROLE_CHAOS: u64 = 1;
const ROLE_STEADY: u64 = 2;
const ROLE_SCALING_INIT: u64 = 3;
const ROLE_SCALING_RUN: u64 = 4;
const ROLE_CONVERGENCE: u64 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    PropagationOfChaos,
    SteadyState,
    ScalingComparison,
    ConvergenceCheck,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::PropagationOfChaos => "propagation-of-chaos",
            ExperimentKind::SteadyState => "steady-state",
            ExperimentKind::ScalingComparison => "scaling-comparison",
            ExperimentKind::ConvergenceCheck => "convergence-check",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [Self::PropagationOfChaos, Self::SteadyState, Self::ScalingComparison, Self::ConvergenceCheck]
            .into_iter()
            .find(|k| k.name() == s)
    }
}

/// A fully resolved experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub objectives: Vec<String>,
    pub dim: usize,
    /// Shared dynamics; `n` and `seed` are set per run.
    pub base_params: DynamicsParams,
    pub kernels: Vec<SelectionKernel>,
    pub population_list: Vec<usize>,
    /// Scaling comparison only.
    pub methods: Vec<Method>,
    /// Initial mutation strength of CBO cells.
    pub cbo_sigma0: f64,
    pub repetitions: usize,
    pub reference_n: usize,
    pub snapshot_stride: u64,
    pub init_box: Hyperrectangle,
    /// Shift each initial ensemble so its empirical mean is the box center.
    pub center_initial_mean: bool,
    pub histogram_bins: usize,
    pub histogram_range: (f64, f64),
    pub accuracy_target: f64,
    pub master_seed: u64,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        self.base_params.validate()?;
        if self.base_params.dim() != self.dim || self.init_box.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: self.base_params.dim() });
        }
        if self.objectives.is_empty() {
            return bad("at least one objective is required");
        }
        for o in &self.objectives {
            Objective::by_name(o, self.dim)?;
        }
        if self.kernels.is_empty() {
            return bad("at least one selection kernel is required");
        }
        for k in &self.kernels {
            k.validate()?;
        }
        if self.repetitions == 0 {
            return bad("repetitions must be at least 1");
        }
        if self.population_list.is_empty() || self.population_list.contains(&0) {
            return bad("population sizes must be positive");
        }
        if self.snapshot_stride == 0 {
            return bad("snapshot_stride must be positive");
        }
        if self.cbo_sigma0 < 0.0 {
            return bad("cbo_sigma0 must be nonnegative");
        }
        match self.kind {
            ExperimentKind::PropagationOfChaos => {
                if self.dim != 1 {
                    return Err(Error::Unsupported("distance tracking needs d = 1".into()));
                }
                if self.population_list.iter().any(|&n| n >= self.reference_n) {
                    return bad("reference_n must exceed every population size");
                }
            }
            ExperimentKind::SteadyState => {
                if self.population_list.len() != 1 {
                    return bad("steady state takes a single population size");
                }
                histogram(&[], self.histogram_bins, self.histogram_range)?;
            }
            ExperimentKind::ScalingComparison => {
                if self.methods.is_empty() {
                    return bad("at least one method is required");
                }
                if !self.kernels.iter().all(|k| matches!(k, SelectionKernel::CboAsymmetric { .. })) {
                    return bad("scaling comparison uses the cbo kernel");
                }
                for m in &self.methods {
                    if let Method::Ga { epsilon } = *m {
                        let mut p = self.base_params.clone();
                        p.epsilon = epsilon;
                        p.validate()?;
                    }
                }
            }
            ExperimentKind::ConvergenceCheck => {
                if self.population_list.len() != 1 || self.kernels.len() != 1 {
                    return bad("convergence check takes one population size and one kernel");
                }
                if !matches!(self.kernels[0], SelectionKernel::Boltzmann { .. }) {
                    return bad("convergence check uses Boltzmann selection");
                }
                if !matches!(&self.base_params.diffusion, Diffusion::Constant(_)) {
                    return bad("convergence check uses a constant diffusion vector");
                }
                if !(self.accuracy_target > 0.0) {
                    return bad("accuracy_target must be positive");
                }
            }
        }
        Ok(())
    }

    /// Recorded generations: every `snapshot_stride`-th one and the last.
    pub fn snapshots(&self) -> Vec<u64> {
        let k_max = self.base_params.k_max;
        let mut ks: Vec<u64> = (0..=k_max).step_by(self.snapshot_stride as usize).collect();
        if ks.last() != Some(&k_max) {
            ks.push(k_max);
        }
        ks
    }
}

/// Column label of a kernel, e.g. `boltzmann:10000` or `rank`.
pub fn kernel_label(k: &SelectionKernel) -> String {
    match k.alpha() {
        Some(a) => format!("{}:{}", k.name(), a),
        None => k.name().to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct W1Row {
    pub kernel: String,
    pub n: usize,
    pub rep: usize,
    pub k: u64,
    pub w1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct W1SummaryRow {
    pub kernel: String,
    pub n: usize,
    pub k: u64,
    pub mean: f64,
    pub q10: f64,
    pub q90: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteadyRow {
    pub kernel: String,
    pub alpha: Option<f64>,
    pub bin_left: f64,
    pub bin_right: f64,
    pub density: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteadyStatsRow {
    pub kernel: String,
    pub alpha: Option<f64>,
    pub mean: f64,
    pub std: f64,
    pub best_value: f64,
    pub best_error: f64,
    pub mean_error: f64,
    pub overflow: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SigmaRow {
    pub k: u64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingRow {
    pub method: String,
    pub objective: String,
    pub diffusion: String,
    pub n: usize,
    pub rep: usize,
    pub error_l2: f64,
    pub accuracy_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingBoxRow {
    pub method: String,
    pub objective: String,
    pub diffusion: String,
    pub n: usize,
    pub metric: String,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub whisker_low: f64,
    pub whisker_high: f64,
    pub n_outliers: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub k: u64,
    pub mean_error: f64,
    pub envelope_tau: f64,
    pub envelope_half_tau: f64,
}

/// Outcome of the convergence check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceSummary {
    pub initial_error: f64,
    /// First generation whose mean error is below the target.
    pub hit_k: Option<u64>,
    /// `ceil(2 log(2 err0 / target) / tau)`.
    pub bound_k: u64,
    /// Mean error stayed under the `e^{-k tau/2}` envelope until `hit_k`.
    pub under_half_envelope: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Tables {
    pub w1: Vec<W1Row>,
    pub w1_summary: Vec<W1SummaryRow>,
    pub steady: Vec<SteadyRow>,
    pub steady_stats: Vec<SteadyStatsRow>,
    pub sigma_trace: Vec<SigmaRow>,
    pub scaling: Vec<ScalingRow>,
    pub scaling_box: Vec<ScalingBoxRow>,
    pub convergence: Vec<ConvergenceRow>,
    pub convergence_summary: Option<ConvergenceSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub spec: ExperimentSpec,
    pub tables: Tables,
}

impl ExperimentResult {
    fn check_finite(&self) -> Result<()> {
        let t = &self.tables;
        let all =
            t.w1.iter()
                .map(|r| r.w1)
                .chain(t.w1_summary.iter().flat_map(|r| [r.mean, r.q10, r.q90]))
                .chain(t.steady.iter().map(|r| r.density))
                .chain(t.steady_stats.iter().flat_map(|r| [r.mean, r.std, r.best_value, r.best_error, r.mean_error]))
                .chain(t.sigma_trace.iter().map(|r| r.sigma))
                .chain(t.scaling.iter().flat_map(|r| [r.error_l2, r.accuracy_gap]))
                .chain(t.scaling_box.iter().flat_map(|r| [r.median, r.q1, r.q3, r.whisker_low, r.whisker_high]))
                .chain(t.convergence.iter().flat_map(|r| [r.mean_error, r.envelope_tau, r.envelope_half_tau]));
        for v in all {
            if !v.is_finite() {
                return Err(Error::NonFinite("experiment result"));
            }
        }
        Ok(())
    }
}

/// Dispatches on `spec.kind`.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    spec.validate()?;
    let result = match spec.kind {
        ExperimentKind::PropagationOfChaos => run_propagation_of_chaos(spec),
        ExperimentKind::SteadyState => run_steady_state(spec),
        ExperimentKind::ScalingComparison => run_scaling_comparison(spec),
        ExperimentKind::ConvergenceCheck => run_convergence_check(spec),
    }?;
    result.check_finite()?;
    Ok(result)
}

fn initial_ensemble<R: rand::Rng>(spec: &ExperimentSpec, n: usize, rng: &mut R) -> Result<Ensemble> {
    let mut ens = Ensemble::uniform(n, &spec.init_box, rng)?;
    if spec.center_initial_mean {
        let shift: Vec<f64> = spec.init_box.center().iter().zip(ens.mean()).map(|(c, m)| c - m).collect();
        ens.translate(&shift)?;
    }
    Ok(ens)
}

/// A GA run of `spec` with one kernel: initial positions and dynamics both
/// come from `seed`.
fn ga_run(
    spec: &ExperimentSpec,
    objective: &Objective,
    kernel: SelectionKernel,
    n: usize,
    seed: u64,
) -> Result<Run<crate::rng::SimRng>> {
    let mut rng = rng_from_seed(seed);
    let ens = initial_ensemble(spec, n, &mut rng)?;
    let mut params = spec.base_params.clone();
    params.n = n;
    params.seed = seed;
    let epsilon = params.epsilon;
    Run::new(ens, params, kernel, Method::Ga { epsilon }, objective.clone(), rng)
}

fn sorted_column(ens: &Ensemble) -> Vec<f64> {
    let mut v = ens.column(0);
    v.sort_by(f64::total_cmp);
    v
}

/// Seed of GA run `rep` with `n` particles under kernel `kernel_idx`. The
/// reference population is repetition 0 at `reference_n`.
pub fn chaos_seed(master: u64, kernel_idx: usize, n: usize, rep: usize) -> u64 {
    derive_seed(master, &[ROLE_CHAOS, kernel_idx as u64, n as u64, rep as u64])
}

/// W1 distance between finite-N ensembles and a large reference population
/// along the run, for every kernel, population size and repetition.
pub fn run_propagation_of_chaos(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    if spec.dim != 1 {
        return Err(Error::Unsupported("distance tracking needs d = 1".into()));
    }
    let objective = Objective::by_name(&spec.objectives[0], spec.dim)?;
    let snaps = spec.snapshots();
    let k_max = spec.base_params.k_max;
    let mut w1 = Vec::new();
    let mut w1_summary = Vec::new();

    for (ki, kernel) in spec.kernels.iter().enumerate() {
        let label = kernel_label(kernel);
        let mut reference =
            ga_run(spec, &objective, *kernel, spec.reference_n, chaos_seed(spec.master_seed, ki, spec.reference_n, 0))?;
        let mut ref_snaps = Vec::with_capacity(snaps.len());
        for &k in &snaps {
            while reference.generation() < k {
                reference.step()?;
            }
            ref_snaps.push(sorted_column(reference.ensemble()));
        }
        drop(reference);

        let cells: Vec<(usize, usize)> =
            spec.population_list.iter().flat_map(|&n| (0..spec.repetitions).map(move |r| (n, r))).collect();
        let per_cell: Vec<Vec<W1Row>> = cells
            .par_iter()
            .map(|&(n, rep)| -> Result<Vec<W1Row>> {
                let mut run = ga_run(spec, &objective, *kernel, n, chaos_seed(spec.master_seed, ki, n, rep))?;
                let mut rows = Vec::with_capacity(snaps.len());
                for (&k, reference) in snaps.iter().zip(&ref_snaps) {
                    while run.generation() < k {
                        run.step()?;
                    }
                    let d = wasserstein1_sorted(&sorted_column(run.ensemble()), reference);
                    rows.push(W1Row { kernel: label.clone(), n, rep, k, w1: d });
                }
                debug_assert_eq!(run.generation(), k_max);
                Ok(rows)
            })
            .collect::<Result<_>>()?;
        let rows: Vec<W1Row> = per_cell.into_iter().flatten().collect();

        for &n in &spec.population_list {
            for &k in &snaps {
                let mut vals: Vec<f64> = rows.iter().filter(|r| r.n == n && r.k == k).map(|r| r.w1).collect();
                vals.sort_by(f64::total_cmp);
                let mean = vals.iter().sum::<f64>() / vals.len() as f64;
                w1_summary.push(W1SummaryRow {
                    kernel: label.clone(),
                    n,
                    k,
                    mean,
                    q10: quantile_sorted(&vals, 0.1),
                    q90: quantile_sorted(&vals, 0.9),
                });
            }
        }
        w1.extend(rows);
    }
    Ok(ExperimentResult { spec: spec.clone(), tables: Tables { w1, w1_summary, ..Tables::default() } })
}

/// Final particle distribution of one long run per kernel.
pub fn run_steady_state(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    let objective = Objective::by_name(&spec.objectives[0], spec.dim)?;
    let n = spec.population_list[0];
    let finals: Vec<(SteadyStatsRow, Vec<SteadyRow>)> = spec
        .kernels
        .par_iter()
        .enumerate()
        .map(|(ki, kernel)| -> Result<_> {
            let seed = derive_seed(spec.master_seed, &[ROLE_STEADY, ki as u64, n as u64]);
            let mut run = ga_run(spec, &objective, *kernel, n, seed)?;
            while run.generation() < spec.base_params.k_max {
                run.step()?;
            }
            let ens = run.ensemble();
            let stats = ensemble_stats(ens, run.values(), &objective)?;
            let hist = histogram(&ens.column(0), spec.histogram_bins, spec.histogram_range)?;
            let label = kernel.name().to_string();
            let alpha = kernel.alpha();
            let rows = hist
                .bins()
                .map(|(l, r, d)| SteadyRow { kernel: label.clone(), alpha, bin_left: l, bin_right: r, density: d })
                .collect();
            Ok((
                SteadyStatsRow {
                    kernel: label,
                    alpha,
                    mean: stats.mean[0],
                    std: stats.variance[0].sqrt(),
                    best_value: stats.best_value,
                    best_error: stats.best_error_l2,
                    mean_error: stats.mean_error_l2,
                    overflow: hist.overflow,
                },
                rows,
            ))
        })
        .collect::<Result<_>>()?;
    let sigma_trace = (0..=spec.base_params.k_max)
        .map(|k| SigmaRow {
            k,
            sigma: crate::dynamics::schedule_sigma(spec.base_params.schedule, spec.base_params.sigma0, k),
        })
        .collect();
    let mut tables = Tables { sigma_trace, ..Tables::default() };
    for (stats, rows) in finals {
        tables.steady_stats.push(stats);
        tables.steady.extend(rows);
    }
    Ok(ExperimentResult { spec: spec.clone(), tables })
}

/// Best-particle error and accuracy gap at `k_max` for every method,
/// objective, population size and repetition. All methods of a cell start
/// from the same initial ensemble.
pub fn run_scaling_comparison(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    let alpha = spec.kernels[0].alpha().unwrap_or(spec.base_params.alpha);
    let kernel = SelectionKernel::CboAsymmetric { alpha };
    let diffusion = spec.base_params.diffusion.name().to_string();
    let mut cells = Vec::new();
    for (oi, name) in spec.objectives.iter().enumerate() {
        for (mi, method) in spec.methods.iter().enumerate() {
            for &n in &spec.population_list {
                for rep in 0..spec.repetitions {
                    cells.push((oi, name.as_str(), mi, *method, n, rep));
                }
            }
        }
    }
    let rows: Vec<ScalingRow> = cells
        .par_iter()
        .map(|&(oi, name, mi, method, n, rep)| -> Result<ScalingRow> {
            let objective = Objective::by_name(name, spec.dim)?;
            let init_seed = derive_seed(spec.master_seed, &[ROLE_SCALING_INIT, oi as u64, n as u64, rep as u64]);
            let run_seed =
                derive_seed(spec.master_seed, &[ROLE_SCALING_RUN, oi as u64, mi as u64, n as u64, rep as u64]);
            let ens = initial_ensemble(spec, n, &mut rng_from_seed(init_seed))?;
            let mut params = spec.base_params.clone();
            params.n = n;
            params.seed = run_seed;
            params.alpha = alpha;
            if method == Method::Cbo {
                params.sigma0 = spec.cbo_sigma0;
            }
            let mut run = Run::new(ens, params, kernel, method, objective.clone(), rng_from_seed(run_seed))?;
            while run.generation() < spec.base_params.k_max {
                run.step()?;
            }
            let best = run.best();
            let x = run.ensemble().row(best);
            let error_l2 = x.iter().zip(objective.minimizer()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            Ok(ScalingRow {
                method: method.tag(),
                objective: name.to_string(),
                diffusion: diffusion.clone(),
                n,
                rep,
                error_l2,
                accuracy_gap: run.values()[best] - objective.min_value(),
            })
        })
        .collect::<Result<_>>()?;

    let mut scaling_box = Vec::new();
    for name in &spec.objectives {
        for method in &spec.methods {
            let tag = method.tag();
            for &n in &spec.population_list {
                let cell: Vec<&ScalingRow> =
                    rows.iter().filter(|r| r.method == tag && &r.objective == name && r.n == n).collect();
                for (metric, vals) in [
                    ("error_l2", cell.iter().map(|r| r.error_l2).collect::<Vec<_>>()),
                    ("accuracy_gap", cell.iter().map(|r| r.accuracy_gap).collect()),
                ] {
                    let b = box_stats(&vals)?;
                    scaling_box.push(ScalingBoxRow {
                        method: tag.clone(),
                        objective: name.clone(),
                        diffusion: diffusion.clone(),
                        n,
                        metric: metric.to_string(),
                        median: b.median,
                        q1: b.q1,
                        q3: b.q3,
                        whisker_low: b.whisker_low,
                        whisker_high: b.whisker_high,
                        n_outliers: b.outliers.len(),
                    });
                }
            }
        }
    }
    Ok(ExperimentResult { spec: spec.clone(), tables: Tables { scaling: rows, scaling_box, ..Tables::default() } })
}

/// Tracks `|m[f_k] - x*|` of a Boltzmann-selection run against the
/// envelopes `e^{-k tau} err0` and `e^{-k tau / 2} err0`.
pub fn run_convergence_check(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    let objective = Objective::by_name(&spec.objectives[0], spec.dim)?;
    let n = spec.population_list[0];
    let seed = derive_seed(spec.master_seed, &[ROLE_CONVERGENCE, n as u64]);
    let mut run = ga_run(spec, &objective, spec.kernels[0], n, seed)?;
    let tau = spec.base_params.tau;
    let err =
        |e: &Ensemble| e.mean().iter().zip(objective.minimizer()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let err0 = err(run.ensemble());
    let mut rows = Vec::new();
    loop {
        let k = run.generation();
        rows.push(ConvergenceRow {
            k,
            mean_error: err(run.ensemble()),
            envelope_tau: (-(k as f64) * tau).exp() * err0,
            envelope_half_tau: (-(k as f64) * tau / 2.0).exp() * err0,
        });
        if k >= spec.base_params.k_max {
            break;
        }
        run.step()?;
    }
    let hit_k = rows.iter().find(|r| r.mean_error < spec.accuracy_target).map(|r| r.k);
    let until = hit_k.unwrap_or(u64::MAX);
    let under_half_envelope = rows.iter().filter(|r| r.k < until).all(|r| r.mean_error <= r.envelope_half_tau);
    let bound_k = (2.0 * (2.0 * err0 / spec.accuracy_target).ln() / tau).ceil().max(0.0) as u64;
    let summary = ConvergenceSummary { initial_error: err0, hit_k, bound_k, under_half_envelope };
    Ok(ExperimentResult {
        spec: spec.clone(),
        tables: Tables { convergence: rows, convergence_summary: Some(summary), ..Tables::default() },
    })
}

/// Named, compiled-in experiment configurations.
pub mod presets {
    use super::*;

    pub const NAMES: [&str; 8] = ["fig1a", "fig1b", "fig2", "fig3a", "fig3b", "fig4a", "fig4b", "thm"];

    /// Population of the steady-state preset; `full_scale` restores 10^6.
    pub const STEADY_N: usize = 100_000;
    pub const STEADY_N_FULL: usize = 1_000_000;

    pub fn description(name: &str) -> Option<&'static str> {
        Some(match name {
            "fig1a" => "W1 to a 1e5-particle reference, Ackley d=1, constant sigma=0.1, Boltzmann and rank",
            "fig1b" => "as fig1a with cooling sigma_(k+1) = 0.95 sigma_k",
            "fig2" => "final distributions after 1e3 generations, Boltzmann alpha=10, 1e4 and rank",
            "fig3a" => "GA eps in {1, 0.3, 0.1} vs CBO in d=10, constant D with cooling (best-particle error)",
            "fig3b" => "GA eps in {1, 0.3, 0.1} vs CBO in d=10, anisotropic D = x* - x (best-particle error)",
            "fig4a" => "fig3a runs, reported as accuracy gap E(X_best) - E(x*)",
            "fig4b" => "fig3b runs, reported as accuracy gap E(X_best) - E(x*)",
            "thm" => "decay of |m[f_k] - x*| for x^2, Boltzmann alpha=1e4, against exp(-k tau/2)",
            _ => return None,
        })
    }

    fn ga_params(
        dim: usize,
        gamma: f64,
        sigma0: f64,
        schedule: SigmaSchedule,
        diffusion: Diffusion,
        k_max: u64,
    ) -> DynamicsParams {
        DynamicsParams {
            tau: 0.1,
            gamma: vec![gamma; dim],
            epsilon: 1.0,
            lambda: 1.0,
            alpha: 1e4,
            sigma0,
            schedule,
            diffusion,
            n: 1,
            k_max,
            seed: 0,
        }
    }

    fn chaos(schedule: SigmaSchedule) -> ExperimentSpec {
        ExperimentSpec {
            kind: ExperimentKind::PropagationOfChaos,
            objectives: vec!["ackley".into()],
            dim: 1,
            base_params: ga_params(1, 0.2, 0.1, schedule, Diffusion::Constant(vec![1.0]), 200),
            kernels: vec![SelectionKernel::Boltzmann { alpha: 1e4 }, SelectionKernel::Rank],
            population_list: vec![100, 1_000, 10_000],
            methods: vec![],
            cbo_sigma0: 0.0,
            repetitions: 100,
            reference_n: 100_000,
            snapshot_stride: 10,
            init_box: Hyperrectangle { lower: vec![-2.0], upper: vec![2.0] },
            center_initial_mean: false,
            histogram_bins: 400,
            histogram_range: (-2.0, 2.0),
            accuracy_target: 1e-2,
            master_seed: 20240501,
        }
    }

    fn scaling(schedule: SigmaSchedule, diffusion: Diffusion) -> ExperimentSpec {
        let dim = 10;
        ExperimentSpec {
            kind: ExperimentKind::ScalingComparison,
            objectives: vec!["styblinski-tang".into(), "ackley".into(), "rastrigin".into()],
            dim,
            // gamma = (lambda, ..., lambda) with lambda = 1.
            base_params: ga_params(dim, 1.0, 1.0, schedule, diffusion, 300),
            kernels: vec![SelectionKernel::CboAsymmetric { alpha: 1e4 }],
            population_list: vec![100, 1_000, 10_000],
            methods: vec![
                Method::Ga { epsilon: 1.0 },
                Method::Ga { epsilon: 0.3 },
                Method::Ga { epsilon: 0.1 },
                Method::Cbo,
            ],
            cbo_sigma0: 3.0,
            repetitions: 100,
            reference_n: 0,
            snapshot_stride: 10,
            init_box: Hyperrectangle { lower: vec![-2.0; dim], upper: vec![2.0; dim] },
            center_initial_mean: false,
            histogram_bins: 400,
            histogram_range: (-2.0, 2.0),
            accuracy_target: 1e-2,
            master_seed: 20240503,
        }
    }

    /// Looks up a preset; `full_scale` only affects `fig2`.
    pub fn preset(name: &str, full_scale: bool) -> Option<ExperimentSpec> {
        let cooling = SigmaSchedule::Geometric(0.95);
        let non_degenerate = Diffusion::Constant(vec![1.0; 10]);
        Some(match name {
            "fig1a" => chaos(SigmaSchedule::Constant),
            "fig1b" => chaos(cooling),
            "fig2" => ExperimentSpec {
                kind: ExperimentKind::SteadyState,
                base_params: ga_params(1, 0.2, 0.1, SigmaSchedule::Constant, Diffusion::Constant(vec![1.0]), 1_000),
                kernels: vec![
                    SelectionKernel::Boltzmann { alpha: 10.0 },
                    SelectionKernel::Boltzmann { alpha: 1e4 },
                    SelectionKernel::Rank,
                ],
                population_list: vec![if full_scale { STEADY_N_FULL } else { STEADY_N }],
                repetitions: 1,
                reference_n: 0,
                master_seed: 20240502,
                ..chaos(SigmaSchedule::Constant)
            },
            "fig3a" | "fig4a" => scaling(cooling, non_degenerate),
            "fig3b" | "fig4b" => scaling(SigmaSchedule::Constant, Diffusion::Anisotropic),
            "thm" => ExperimentSpec {
                kind: ExperimentKind::ConvergenceCheck,
                objectives: vec!["quadratic".into()],
                base_params: ga_params(1, 0.2, 0.1, cooling, Diffusion::Constant(vec![1.0]), 150),
                kernels: vec![SelectionKernel::Boltzmann { alpha: 1e4 }],
                population_list: vec![100_000],
                repetitions: 1,
                reference_n: 0,
                snapshot_stride: 1,
                // Unif[-2, 2] shifted by one; the empirical mean is then pinned to 1.
                init_box: Hyperrectangle { lower: vec![-1.0], upper: vec![3.0] },
                center_initial_mean: true,
                master_seed: 20240504,
                ..chaos(cooling)
            },
            _ => return None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_chaos() -> ExperimentSpec {
        let mut s = presets::preset("fig1a", false).unwrap();
        s.population_list = vec![20, 50];
        s.reference_n = 400;
        s.repetitions = 3;
        s.base_params.k_max = 25;
        s
    }

    #[test]
    fn presets_are_valid() {
        for name in presets::NAMES {
            let s = presets::preset(name, false).unwrap();
            s.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
            assert!(presets::description(name).is_some());
        }
        assert!(presets::preset("fig9", false).is_none());
        assert_eq!(presets::preset("fig2", true).unwrap().population_list, vec![presets::STEADY_N_FULL]);
    }

    #[test]
    fn snapshots_include_last() {
        let mut s = small_chaos();
        assert_eq!(s.snapshots(), vec![0, 10, 20, 25]);
        s.base_params.k_max = 20;
        assert_eq!(s.snapshots(), vec![0, 10, 20]);
    }

    #[test]
    fn chaos_row_counts() {
        let s = small_chaos();
        let r = run_experiment(&s).unwrap();
        let snaps = s.snapshots().len();
        assert_eq!(r.tables.w1.len(), s.kernels.len() * s.population_list.len() * s.repetitions * snaps);
        assert_eq!(r.tables.w1_summary.len(), s.kernels.len() * s.population_list.len() * snaps);
        assert!(r.tables.w1_summary.iter().all(|row| row.q10 <= row.mean.max(row.q10) && row.q10 <= row.q90));
    }

    #[test]
    fn reference_against_itself_is_zero() {
        let mut s = small_chaos();
        s.population_list = vec![s.reference_n];
        s.repetitions = 1;
        let r = run_propagation_of_chaos(&s).unwrap();
        assert!(r.tables.w1.iter().all(|row| row.w1 == 0.0));
        // The same configuration is rejected by validation.
        assert!(s.validate().is_err());
    }

    #[test]
    fn chaos_rejects_multidimensional() {
        let mut s = small_chaos();
        s.dim = 2;
        assert!(matches!(run_propagation_of_chaos(&s), Err(Error::Unsupported(_))));
    }

    #[test]
    fn repetitions_are_order_independent() {
        let s = small_chaos();
        let a = run_experiment(&s).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| run_experiment(&s)).unwrap();
        assert_eq!(a, b);
        // Dropping a repetition leaves the remaining rows untouched.
        let mut fewer = s.clone();
        fewer.repetitions = 2;
        let c = run_experiment(&fewer).unwrap();
        for row in &c.tables.w1 {
            assert!(a.tables.w1.contains(row));
        }
    }

    #[test]
    fn steady_state_small() {
        let mut s = presets::preset("fig2", false).unwrap();
        s.population_list = vec![2_000];
        s.base_params.k_max = 60;
        s.base_params.schedule = SigmaSchedule::Geometric(0.9);
        let r = run_experiment(&s).unwrap();
        assert_eq!(r.tables.steady.len(), 3 * s.histogram_bins);
        assert_eq!(r.tables.sigma_trace.len(), 61);
        for st in &r.tables.steady_stats {
            assert!(st.std * st.std < s.base_params.sigma0.powi(2), "{st:?}");
        }
        assert_eq!(r, run_experiment(&s).unwrap());
    }

    #[test]
    fn scaling_small() {
        let mut s = presets::preset("fig3b", false).unwrap();
        s.population_list = vec![30];
        s.repetitions = 4;
        s.base_params.k_max = 20;
        let r = run_experiment(&s).unwrap();
        assert_eq!(r.tables.scaling.len(), 3 * 4 * 4);
        assert_eq!(r.tables.scaling_box.len(), 3 * 4 * 2);
        assert!(r.tables.scaling.iter().all(|row| row.accuracy_gap >= 0.0 || row.objective == "styblinski-tang"));
        let mut bad = s.clone();
        bad.kernels = vec![SelectionKernel::Rank];
        assert!(run_experiment(&bad).is_err());
    }

    #[test]
    fn convergence_small() {
        let mut s = presets::preset("thm", false).unwrap();
        s.population_list = vec![5_000];
        s.base_params.k_max = 40;
        let r = run_experiment(&s).unwrap();
        assert_eq!(r.tables.convergence.len(), 41);
        let sum = r.tables.convergence_summary.unwrap();
        assert!((sum.initial_error - 1.0).abs() < 1e-12);
        assert_eq!(r.tables.convergence[0].envelope_tau, sum.initial_error);
    }
}
