//! Kinetic simulation of genetic algorithms with interacting particles.
//!
//! An [`Ensemble`] of `N` points in `R^d` evolves under one of three
//! stochastic updates: the generational GA chain with time step `tau` and
//! scaling `epsilon` ([`ga_step`]), its consensus-based limit
//! ([`cbo_step`]), and the kinetic binary-interaction variant
//! ([`kbo_step`]). Parents are drawn from pluggable
//! [`SelectionKernel`]s; [`measures`] and [`experiments`] provide the
//! diagnostics and the seeded study harnesses built on top.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod ensemble;
pub mod error;
pub mod experiments;
pub mod measures;
pub mod objectives;
pub mod rng;
pub mod selection;

pub use dynamics::{
    cbo_step, crossover_mutate, ga_step, kbo_step, kbo_weight, schedule_sigma, Diffusion, DynamicsParams, KboParams,
    Method, MutationState, Run, SigmaSchedule,
};
pub use ensemble::{Ensemble, Hyperrectangle};
pub use error::{Error, Result};
pub use experiments::{presets, run_experiment, ExperimentKind, ExperimentResult, ExperimentSpec};
pub use measures::{box_stats, ensemble_stats, histogram, wasserstein1_1d, BoxStats, DensityTable, EnsembleStats};
pub use objectives::{verify_growth_assumptions, Benchmark, GrowthReport, Objective};
pub use rng::{derive_seed, rng_from_seed, SimRng};
pub use selection::{selection_weights, weighted_mean, Fitness, ParentWeights, SelectionKernel};
