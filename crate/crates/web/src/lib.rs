//! Browser bindings for three interactive views of the simulator:
//! steady-state histograms, a two-dimensional GA-vs-CBO swarm, and the
//! W1 distance of small populations to a large reference.
//!
//! The plain functions below carry the logic and are tested natively; the
//! `#[wasm_bindgen]` items only translate errors into JS exceptions.

use kga_core::dynamics::{Diffusion, DynamicsParams, Method, Run, SigmaSchedule};
use kga_core::ensemble::{Ensemble, Hyperrectangle};
use kga_core::experiments::{presets, run_propagation_of_chaos, run_steady_state, ExperimentSpec};
use kga_core::objectives::Objective;
use kga_core::rng::{derive_seed, rng_from_seed, SimRng};
use kga_core::selection::SelectionKernel;
use wasm_bindgen::prelude::*;

/// Bounds on user input, to keep a browser tab responsive.
const MAX_PARTICLES: usize = 200_000;
const MAX_GENERATIONS: u64 = 5_000;

fn kernel(name: &str, alpha: f64) -> Result<SelectionKernel, String> {
    match name {
        "boltzmann" => Ok(SelectionKernel::Boltzmann { alpha }),
        "rank" => Ok(SelectionKernel::Rank),
        "cbo" => Ok(SelectionKernel::CboAsymmetric { alpha }),
        _ => Err(format!("unknown kernel `{name}`")),
    }
}

fn check_size(n: usize, k_max: u64) -> Result<(), String> {
    if n == 0 || n > MAX_PARTICLES {
        return Err(format!("population must be in 1..={MAX_PARTICLES}"));
    }
    if k_max > MAX_GENERATIONS {
        return Err(format!("at most {MAX_GENERATIONS} generations"));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn steady_spec(
    kernel_name: &str,
    alpha: f64,
    sigma: f64,
    cooling: f64,
    n: usize,
    k_max: u64,
    bins: usize,
    seed: u64,
) -> Result<ExperimentSpec, String> {
    check_size(n, k_max)?;
    let mut spec = presets::preset("fig2", false).expect("fig2 preset");
    spec.kernels = vec![kernel(kernel_name, alpha)?];
    spec.population_list = vec![n];
    spec.base_params.k_max = k_max;
    spec.base_params.sigma0 = sigma;
    spec.base_params.schedule = if cooling < 1.0 { SigmaSchedule::Geometric(cooling) } else { SigmaSchedule::Constant };
    spec.histogram_bins = bins;
    spec.master_seed = seed;
    spec.validate().map_err(|e| e.to_string())?;
    Ok(spec)
}

/// Density of the final 1-D Ackley ensemble on `[-2, 2]`, one value per bin.
#[allow(clippy::too_many_arguments)]
pub fn steady_histogram(
    kernel_name: &str,
    alpha: f64,
    sigma: f64,
    cooling: f64,
    n: usize,
    k_max: u64,
    bins: usize,
    seed: u64,
) -> Result<Vec<f64>, String> {
    let spec = steady_spec(kernel_name, alpha, sigma, cooling, n, k_max, bins, seed)?;
    let r = run_steady_state(&spec).map_err(|e| e.to_string())?;
    Ok(r.tables.steady.iter().map(|row| row.density).collect())
}

/// Mean W1 distance to a reference population at every `stride`-th
/// generation, for each population size in `sizes`; rows are concatenated.
#[allow(clippy::too_many_arguments)]
pub fn w1_curves(
    kernel_name: &str,
    alpha: f64,
    sizes: &[usize],
    reference_n: usize,
    repetitions: usize,
    k_max: u64,
    stride: u64,
    seed: u64,
) -> Result<Vec<f64>, String> {
    check_size(reference_n, k_max)?;
    let mut spec = presets::preset("fig1a", false).expect("fig1a preset");
    spec.kernels = vec![kernel(kernel_name, alpha)?];
    spec.population_list = sizes.to_vec();
    spec.reference_n = reference_n;
    spec.repetitions = repetitions;
    spec.base_params.k_max = k_max;
    spec.snapshot_stride = stride;
    spec.master_seed = seed;
    spec.validate().map_err(|e| e.to_string())?;
    let r = run_propagation_of_chaos(&spec).map_err(|e| e.to_string())?;
    // Summary rows come grouped by N, then k.
    Ok(r.tables.w1_summary.iter().map(|row| row.mean).collect())
}

/// Two runs side by side on a 2-D objective from the same initial swarm:
/// the scaled GA chain and CBO.
pub struct SwarmPair {
    ga: Run<SimRng>,
    cbo: Run<SimRng>,
}

impl SwarmPair {
    pub fn create(objective: &str, n: usize, epsilon: f64, anisotropic: bool, seed: u64) -> Result<Self, String> {
        check_size(n, 0)?;
        let obj = Objective::by_name(objective, 2).map_err(|e| e.to_string())?;
        let domain = Hyperrectangle::cube(2, -2.0, 2.0).map_err(|e| e.to_string())?;
        let init =
            Ensemble::uniform(n, &domain, &mut rng_from_seed(derive_seed(seed, &[0]))).map_err(|e| e.to_string())?;
        let (diffusion, schedule) = if anisotropic {
            (Diffusion::Anisotropic, SigmaSchedule::Constant)
        } else {
            (Diffusion::Constant(vec![1.0; 2]), SigmaSchedule::Geometric(0.95))
        };
        let params = DynamicsParams {
            tau: 0.1,
            gamma: vec![1.0; 2],
            epsilon,
            lambda: 1.0,
            alpha: 1e4,
            sigma0: 1.0,
            schedule,
            diffusion,
            n,
            k_max: MAX_GENERATIONS,
            seed,
        };
        let kernel = SelectionKernel::CboAsymmetric { alpha: params.alpha };
        let ga = Run::new(
            init.clone(),
            params.clone(),
            kernel,
            Method::Ga { epsilon },
            obj.clone(),
            rng_from_seed(derive_seed(seed, &[1])),
        )
        .map_err(|e| e.to_string())?;
        let cbo_params = DynamicsParams { sigma0: 3.0, ..params };
        let cbo = Run::new(init, cbo_params, kernel, Method::Cbo, obj, rng_from_seed(derive_seed(seed, &[2])))
            .map_err(|e| e.to_string())?;
        Ok(Self { ga, cbo })
    }

    pub fn advance(&mut self, steps: u32) -> Result<(), String> {
        for _ in 0..steps {
            self.ga.step().map_err(|e| e.to_string())?;
            self.cbo.step().map_err(|e| e.to_string())?;
        }
        Ok(())
    }

    pub fn generation(&self) -> u64 {
        self.ga.generation()
    }

    fn best_error(run: &Run<SimRng>) -> f64 {
        let x = run.ensemble().row(run.best());
        x.iter().zip(run.objective().minimizer()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    }

    /// `[ga error, cbo error]` of the best particles.
    pub fn best_errors(&self) -> [f64; 2] {
        [Self::best_error(&self.ga), Self::best_error(&self.cbo)]
    }

    pub fn ga_positions(&self) -> Vec<f64> {
        self.ga.ensemble().as_flat().to_vec()
    }

    pub fn cbo_positions(&self) -> Vec<f64> {
        self.cbo.ensemble().as_flat().to_vec()
    }
}

#[wasm_bindgen(js_name = steadyHistogram)]
#[allow(clippy::too_many_arguments)]
pub fn steady_histogram_js(
    kernel: &str,
    alpha: f64,
    sigma: f64,
    cooling: f64,
    n: usize,
    k_max: u32,
    bins: usize,
    seed: u32,
) -> Result<Vec<f64>, JsValue> {
    steady_histogram(kernel, alpha, sigma, cooling, n, k_max.into(), bins, seed.into())
        .map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = w1Curves)]
#[allow(clippy::too_many_arguments)]
pub fn w1_curves_js(
    kernel: &str,
    alpha: f64,
    sizes: Vec<u32>,
    reference_n: usize,
    repetitions: usize,
    k_max: u32,
    stride: u32,
    seed: u32,
) -> Result<Vec<f64>, JsValue> {
    let sizes: Vec<usize> = sizes.into_iter().map(|s| s as usize).collect();
    w1_curves(kernel, alpha, &sizes, reference_n, repetitions, k_max.into(), stride.into(), seed.into())
        .map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = Swarm)]
pub struct SwarmJs(SwarmPair);

#[wasm_bindgen(js_class = Swarm)]
impl SwarmJs {
    #[wasm_bindgen(constructor)]
    pub fn new(objective: &str, n: usize, epsilon: f64, anisotropic: bool, seed: u32) -> Result<SwarmJs, JsValue> {
        SwarmPair::create(objective, n, epsilon, anisotropic, seed.into())
            .map(SwarmJs)
            .map_err(|e| JsValue::from_str(&e))
    }

    pub fn step(&mut self, steps: u32) -> Result<(), JsValue> {
        self.0.advance(steps).map_err(|e| JsValue::from_str(&e))
    }

    pub fn generation(&self) -> f64 {
        self.0.generation() as f64
    }

    #[wasm_bindgen(js_name = bestErrors)]
    pub fn best_errors(&self) -> Vec<f64> {
        self.0.best_errors().to_vec()
    }

    #[wasm_bindgen(js_name = gaPositions)]
    pub fn ga_positions(&self) -> Vec<f64> {
        self.0.ga_positions()
    }

    #[wasm_bindgen(js_name = cboPositions)]
    pub fn cbo_positions(&self) -> Vec<f64> {
        self.0.cbo_positions()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn histogram_integrates_to_one() {
        let d = steady_histogram("boltzmann", 1e4, 0.1, 1.0, 500, 30, 40, 3).unwrap();
        assert_eq!(d.len(), 40);
        let mass: f64 = d.iter().map(|v| v * 0.1).sum();
        assert!((mass - 1.0).abs() < 1e-12, "{mass}");
        assert_eq!(d, steady_histogram("boltzmann", 1e4, 0.1, 1.0, 500, 30, 40, 3).unwrap());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(steady_histogram("tournament", 1.0, 0.1, 1.0, 100, 10, 10, 0).is_err());
        assert!(steady_histogram("rank", 1.0, 0.1, 1.0, 0, 10, 10, 0).is_err());
        assert!(steady_histogram("rank", 1.0, 0.1, 1.0, 10, 10 * MAX_GENERATIONS, 10, 0).is_err());
        assert!(SwarmPair::create("sphere", 10, 0.5, true, 0).is_err());
        assert!(SwarmPair::create("ackley", 10, 0.05, true, 0).is_err());
    }

    #[test]
    fn w1_curve_shape() {
        let c = w1_curves("rank", 1.0, &[20, 80], 400, 3, 20, 10, 9).unwrap();
        // Two sizes, snapshots 0, 10, 20.
        assert_eq!(c.len(), 6);
        assert!(c.iter().all(|v| v.is_finite() && *v >= 0.0));
    }

    #[test]
    fn swarm_converges_on_ackley() {
        let mut s = SwarmPair::create("ackley", 200, 0.1, true, 4).unwrap();
        assert_eq!(s.ga_positions(), s.cbo_positions());
        s.advance(150).unwrap();
        assert_eq!(s.generation(), 150);
        let [ga, cbo] = s.best_errors();
        assert!(ga < 1e-2 && cbo < 1e-2, "{ga} {cbo}");
        assert_eq!(s.ga_positions().len(), 400);
    }
}
