//! TOML experiment configuration.
//!
//! A file either names a compiled-in `preset` and overrides some of its
//! fields, or names a `kind` and overrides the defaults of that kind. Every
//! field is optional; scalars given where a vector is expected are
//! broadcast to `dim` components.
//!
//! ```toml
//! preset = "fig1a"
//! repetitions = 20
//! kernels = ["boltzmann:10000", "rank"]
//!
//! [dynamics]
//! schedule = "geometric:0.95"
//! ```

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use kga_core::dynamics::{Diffusion, DynamicsParams, Method, SigmaSchedule};
use kga_core::ensemble::Hyperrectangle;
use kga_core::experiments::{presets, ExperimentKind, ExperimentSpec};
use kga_core::selection::{Fitness, SelectionKernel};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::CliError;

/// Either one number for every component or one per component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Broadcast {
    Scalar(f64),
    Vector(Vec<f64>),
}

impl Broadcast {
    fn compress(v: &[f64]) -> Self {
        match v.first() {
            Some(&first) if v.iter().all(|x| x.to_bits() == first.to_bits()) => Broadcast::Scalar(first),
            _ => Broadcast::Vector(v.to_vec()),
        }
    }

    fn expand(&self, dim: usize, key: &str) -> Result<Vec<f64>, CliError> {
        match self {
            Broadcast::Scalar(x) => Ok(vec![*x; dim]),
            Broadcast::Vector(v) if v.len() == dim => Ok(v.clone()),
            Broadcast::Vector(v) => {
                Err(CliError::Config(format!("{key}: expected {dim} components, found {}", v.len())))
            }
        }
    }
}

/// Values written as `name` or `name:parameter` in the config file.
macro_rules! string_value {
    ($ty:ident) => {
        impl Serialize for $ty {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }

        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                String::deserialize(d)?.parse().map_err(D::Error::custom)
            }
        }
    };
}

fn split_param(s: &str) -> (&str, Option<Result<f64, String>>) {
    match s.split_once(':') {
        Some((name, p)) => (name, Some(p.trim().parse::<f64>().map_err(|_| format!("bad number `{p}` in `{s}`")))),
        None => (s, None),
    }
}

/// Selection kernel: `boltzmann:A`, `rank`, `cbo:A`, `roulette:A`
/// (exponential fitness) or `roulette` (reciprocal fitness).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelName(pub SelectionKernel);

impl fmt::Display for KernelName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&kga_core::experiments::kernel_label(&self.0))
    }
}

impl FromStr for KernelName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (name, p) = split_param(s);
        let p = p.transpose()?;
        let need = |p: Option<f64>| p.ok_or_else(|| format!("kernel `{name}` needs a parameter, e.g. `{name}:10`"));
        let k = match name {
            "boltzmann" => SelectionKernel::Boltzmann { alpha: need(p)? },
            "cbo" => SelectionKernel::CboAsymmetric { alpha: need(p)? },
            "rank" if p.is_none() => SelectionKernel::Rank,
            "roulette" => match p {
                Some(alpha) => SelectionKernel::RouletteWheel(Fitness::Exponential { alpha }),
                None => SelectionKernel::RouletteWheel(Fitness::Reciprocal),
            },
            _ => return Err(format!("unknown selection kernel `{s}`")),
        };
        Ok(KernelName(k))
    }
}

string_value!(KernelName);

/// Update rule: `ga:EPSILON` or `cbo`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodName(pub Method);

impl fmt::Display for MethodName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Method::Ga { epsilon } => write!(f, "ga:{epsilon}"),
            Method::Cbo => f.write_str("cbo"),
        }
    }
}

impl FromStr for MethodName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match split_param(s) {
            ("ga", Some(eps)) => Ok(MethodName(Method::Ga { epsilon: eps? })),
            ("cbo", None) => Ok(MethodName(Method::Cbo)),
            _ => Err(format!("unknown method `{s}` (expected `ga:EPSILON` or `cbo`)")),
        }
    }
}

string_value!(MethodName);

/// `constant` or `geometric:FACTOR`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleName(pub SigmaSchedule);

impl fmt::Display for ScheduleName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            SigmaSchedule::Constant => f.write_str("constant"),
            SigmaSchedule::Geometric(c) => write!(f, "geometric:{c}"),
        }
    }
}

impl FromStr for ScheduleName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match split_param(s) {
            ("constant", None) => Ok(ScheduleName(SigmaSchedule::Constant)),
            ("geometric", Some(c)) => Ok(ScheduleName(SigmaSchedule::Geometric(c?))),
            _ => Err(format!("unknown schedule `{s}` (expected `constant` or `geometric:FACTOR`)")),
        }
    }
}

string_value!(ScheduleName);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiffusionKind {
    Constant,
    Anisotropic,
    Isotropic,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsConfig {
    pub tau: Option<f64>,
    pub gamma: Option<Broadcast>,
    pub epsilon: Option<f64>,
    pub lambda: Option<f64>,
    pub alpha: Option<f64>,
    pub sigma0: Option<f64>,
    pub schedule: Option<ScheduleName>,
    pub diffusion: Option<DiffusionKind>,
    /// Entries of a constant diffusion vector.
    pub diffusion_vector: Option<Broadcast>,
    pub k_max: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub preset: Option<String>,
    pub kind: Option<ExperimentKind>,
    pub seed: Option<u64>,
    pub objectives: Option<Vec<String>>,
    pub dim: Option<usize>,
    pub kernels: Option<Vec<KernelName>>,
    pub population: Option<Vec<usize>>,
    pub methods: Option<Vec<MethodName>>,
    pub cbo_sigma0: Option<f64>,
    pub repetitions: Option<usize>,
    pub reference_n: Option<usize>,
    pub snapshot_stride: Option<u64>,
    pub init_lower: Option<Broadcast>,
    pub init_upper: Option<Broadcast>,
    pub center_initial_mean: Option<bool>,
    pub histogram_bins: Option<usize>,
    pub histogram_range: Option<[f64; 2]>,
    pub accuracy_target: Option<f64>,
    /// Restores the 10^6-particle population of the steady-state preset.
    pub full_scale: Option<bool>,
    pub dynamics: Option<DynamicsConfig>,
}

macro_rules! overlay {
    ($top:expr, $base:expr; $($field:ident),* $(,)?) => {
        $( if $top.$field.is_none() { $top.$field = $base.$field.take(); } )*
    };
}

impl ConfigFile {
    /// The complete description of `spec`, with no preset reference.
    pub fn from_spec(spec: &ExperimentSpec) -> Self {
        let p = &spec.base_params;
        let (diffusion, diffusion_vector) = match &p.diffusion {
            Diffusion::Constant(v) => (DiffusionKind::Constant, Some(Broadcast::compress(v))),
            Diffusion::Anisotropic => (DiffusionKind::Anisotropic, None),
            Diffusion::Isotropic => (DiffusionKind::Isotropic, None),
        };
        ConfigFile {
            preset: None,
            kind: Some(spec.kind),
            seed: Some(spec.master_seed),
            objectives: Some(spec.objectives.clone()),
            dim: Some(spec.dim),
            kernels: Some(spec.kernels.iter().copied().map(KernelName).collect()),
            population: Some(spec.population_list.clone()),
            methods: Some(spec.methods.iter().copied().map(MethodName).collect()),
            cbo_sigma0: Some(spec.cbo_sigma0),
            repetitions: Some(spec.repetitions),
            reference_n: Some(spec.reference_n),
            snapshot_stride: Some(spec.snapshot_stride),
            init_lower: Some(Broadcast::compress(&spec.init_box.lower)),
            init_upper: Some(Broadcast::compress(&spec.init_box.upper)),
            center_initial_mean: Some(spec.center_initial_mean),
            histogram_bins: Some(spec.histogram_bins),
            histogram_range: Some([spec.histogram_range.0, spec.histogram_range.1]),
            accuracy_target: Some(spec.accuracy_target),
            full_scale: None,
            dynamics: Some(DynamicsConfig {
                tau: Some(p.tau),
                gamma: Some(Broadcast::compress(&p.gamma)),
                epsilon: Some(p.epsilon),
                lambda: Some(p.lambda),
                alpha: Some(p.alpha),
                sigma0: Some(p.sigma0),
                schedule: Some(ScheduleName(p.schedule)),
                diffusion: Some(diffusion),
                diffusion_vector,
                k_max: Some(p.k_max),
            }),
        }
    }

    /// Fills every unset field of `self` from `base`.
    fn overlay(mut self, mut base: ConfigFile) -> ConfigFile {
        overlay!(self, base; kind, seed, objectives, dim, kernels, population, methods, cbo_sigma0,
            repetitions, reference_n, snapshot_stride, init_lower, init_upper, center_initial_mean,
            histogram_bins, histogram_range, accuracy_target);
        let mut top = self.dynamics.take().unwrap_or_default();
        if let Some(mut b) = base.dynamics.take() {
            overlay!(top, b; tau, gamma, epsilon, lambda, alpha, sigma0, schedule, diffusion,
                diffusion_vector, k_max);
        }
        self.dynamics = Some(top);
        self
    }

    /// Resolves presets and defaults into a validated spec.
    pub fn resolve(self) -> Result<ExperimentSpec, CliError> {
        let full_scale = self.full_scale.unwrap_or(false);
        let base_name = match (&self.preset, self.kind) {
            (Some(p), _) => p.clone(),
            (None, Some(kind)) => default_preset(kind).to_string(),
            (None, None) => return Err(CliError::Config("either `preset` or `kind` is required".into())),
        };
        let base = presets::preset(&base_name, full_scale)
            .ok_or_else(|| CliError::Config(format!("preset: unknown preset `{base_name}`")))?;
        let c = self.overlay(ConfigFile::from_spec(&base));
        let dy = c.dynamics.expect("overlay sets dynamics");
        let req = |key: &str| CliError::Config(format!("{key}: missing value"));

        let dim = c.dim.ok_or_else(|| req("dim"))?;
        if dim == 0 {
            return Err(CliError::Config("dim: must be positive".into()));
        }
        let diffusion = match dy.diffusion.ok_or_else(|| req("dynamics.diffusion"))? {
            DiffusionKind::Constant => Diffusion::Constant(
                dy.diffusion_vector
                    .ok_or_else(|| req("dynamics.diffusion_vector"))?
                    .expand(dim, "dynamics.diffusion_vector")?,
            ),
            DiffusionKind::Anisotropic => Diffusion::Anisotropic,
            DiffusionKind::Isotropic => Diffusion::Isotropic,
        };
        let base_params = DynamicsParams {
            tau: dy.tau.ok_or_else(|| req("dynamics.tau"))?,
            gamma: dy.gamma.ok_or_else(|| req("dynamics.gamma"))?.expand(dim, "dynamics.gamma")?,
            epsilon: dy.epsilon.ok_or_else(|| req("dynamics.epsilon"))?,
            lambda: dy.lambda.ok_or_else(|| req("dynamics.lambda"))?,
            alpha: dy.alpha.ok_or_else(|| req("dynamics.alpha"))?,
            sigma0: dy.sigma0.ok_or_else(|| req("dynamics.sigma0"))?,
            schedule: dy.schedule.ok_or_else(|| req("dynamics.schedule"))?.0,
            diffusion,
            n: 1,
            k_max: dy.k_max.ok_or_else(|| req("dynamics.k_max"))?,
            seed: 0,
        };
        let lower = c.init_lower.ok_or_else(|| req("init_lower"))?.expand(dim, "init_lower")?;
        let upper = c.init_upper.ok_or_else(|| req("init_upper"))?.expand(dim, "init_upper")?;
        let init_box =
            Hyperrectangle::new(lower, upper).map_err(|e| CliError::Config(format!("init_lower/init_upper: {e}")))?;
        let range = c.histogram_range.ok_or_else(|| req("histogram_range"))?;
        let spec = ExperimentSpec {
            kind: c.kind.ok_or_else(|| req("kind"))?,
            objectives: c.objectives.ok_or_else(|| req("objectives"))?,
            dim,
            base_params,
            kernels: c.kernels.ok_or_else(|| req("kernels"))?.into_iter().map(|k| k.0).collect(),
            population_list: c.population.ok_or_else(|| req("population"))?,
            methods: c.methods.ok_or_else(|| req("methods"))?.into_iter().map(|m| m.0).collect(),
            cbo_sigma0: c.cbo_sigma0.ok_or_else(|| req("cbo_sigma0"))?,
            repetitions: c.repetitions.ok_or_else(|| req("repetitions"))?,
            reference_n: c.reference_n.ok_or_else(|| req("reference_n"))?,
            snapshot_stride: c.snapshot_stride.ok_or_else(|| req("snapshot_stride"))?,
            init_box,
            center_initial_mean: c.center_initial_mean.ok_or_else(|| req("center_initial_mean"))?,
            histogram_bins: c.histogram_bins.ok_or_else(|| req("histogram_bins"))?,
            histogram_range: (range[0], range[1]),
            accuracy_target: c.accuracy_target.ok_or_else(|| req("accuracy_target"))?,
            master_seed: c.seed.ok_or_else(|| req("seed"))?,
        };
        spec.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(spec)
    }
}

/// Preset supplying the defaults of a kind when no preset is named.
pub fn default_preset(kind: ExperimentKind) -> &'static str {
    match kind {
        ExperimentKind::PropagationOfChaos => "fig1a",
        ExperimentKind::SteadyState => "fig2",
        ExperimentKind::ScalingComparison => "fig3a",
        ExperimentKind::ConvergenceCheck => "thm",
    }
}

/// Parses TOML text; unknown keys and type errors are reported with their
/// key path.
pub fn parse_config_str(text: &str) -> Result<ExperimentSpec, CliError> {
    if text.trim().is_empty() {
        return Err(CliError::Config("empty configuration (set `preset` or `kind`)".into()));
    }
    parse_file(text)?.resolve()
}

/// Parses TOML text without resolving presets or defaults.
pub fn parse_file(text: &str) -> Result<ConfigFile, CliError> {
    let de = toml::Deserializer::parse(text).map_err(|e| CliError::Config(format!("syntax error: {e}")))?;
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::Config(format!("{path}: {}", e.into_inner().message()))
    })
}

pub fn parse_config(path: &Path) -> Result<ExperimentSpec, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config_str(&text)
}

/// TOML text that [`parse_config_str`] maps back to `spec`.
pub fn to_toml(spec: &ExperimentSpec) -> String {
    toml::to_string(&ConfigFile::from_spec(spec)).expect("config is always serializable")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_reference() {
        let s = parse_config_str("preset = \"fig1a\"").unwrap();
        assert_eq!(s, presets::preset("fig1a", false).unwrap());
        assert_eq!(s.base_params.tau, 0.1);
        assert_eq!(s.base_params.gamma, vec![0.2]);
        assert_eq!(s.base_params.sigma0, 0.1);
        assert_eq!(s.population_list, vec![100, 1_000, 10_000]);
        assert_eq!(s.reference_n, 100_000);
    }

    #[test]
    fn overrides_apply() {
        let s =
            parse_config_str("preset = \"fig3b\"\nrepetitions = 5\nkernels = [\"cbo:100\"]\n[dynamics]\nk_max = 7\n")
                .unwrap();
        assert_eq!(s.repetitions, 5);
        assert_eq!(s.base_params.k_max, 7);
        assert_eq!(s.kernels, vec![SelectionKernel::CboAsymmetric { alpha: 100.0 }]);
        assert_eq!(s.base_params.diffusion, Diffusion::Anisotropic);
    }

    #[test]
    fn kind_defaults_and_broadcast() {
        let s = parse_config_str("kind = \"scaling-comparison\"\ndim = 3\nobjectives = [\"ackley\"]").unwrap();
        assert_eq!(s.base_params.gamma, vec![1.0; 3]);
        assert_eq!(s.init_box.lower, vec![-2.0; 3]);
        assert_eq!(s.base_params.diffusion, Diffusion::Constant(vec![1.0; 3]));
    }

    #[test]
    fn tau_above_epsilon() {
        let e = parse_config_str("preset = \"fig1a\"\n[dynamics]\ntau = 0.5\nepsilon = 0.1\n").unwrap_err();
        assert!(e.to_string().contains("tau ≤ epsilon required"), "{e}");
        assert_eq!(e.exit_code(), 1);
    }

    #[test]
    fn empty_and_malformed() {
        assert_eq!(parse_config_str("").unwrap_err().exit_code(), 1);
        assert!(parse_config_str("preset = ").is_err());
        assert!(parse_config_str("seed = 3").is_err());
        assert!(parse_config_str("preset = \"nope\"").is_err());
    }

    #[test]
    fn unknown_keys_name_their_path() {
        let e = parse_config_str("preset = \"fig1a\"\nrepetitons = 3").unwrap_err();
        assert!(e.to_string().contains("repetitons"), "{e}");
        let e = parse_config_str("preset = \"fig1a\"\n[dynamics]\ntua = 0.1").unwrap_err();
        assert!(e.to_string().contains("dynamics"), "{e}");
        let e = parse_config_str("preset = \"fig1a\"\n[dynamics]\ntau = \"x\"").unwrap_err();
        assert!(e.to_string().contains("dynamics.tau"), "{e}");
        let e = parse_config_str("preset = \"fig1a\"\nkernels = [\"rank\", \"tournament\"]").unwrap_err();
        assert!(e.to_string().contains("kernels[1]"), "{e}");
        let e = parse_config_str("preset = \"fig1a\"\ninit_lower = [0.0, 1.0]").unwrap_err();
        assert!(e.to_string().contains("init_lower"), "{e}");
    }

    #[test]
    fn names_round_trip() {
        for s in ["boltzmann:10000", "rank", "cbo:0.5", "roulette:3", "roulette"] {
            assert_eq!(s.parse::<KernelName>().unwrap().to_string(), s);
        }
        for s in ["ga:0.1", "ga:1", "cbo"] {
            assert_eq!(s.parse::<MethodName>().unwrap().to_string(), s);
        }
        for s in ["constant", "geometric:0.95"] {
            assert_eq!(s.parse::<ScheduleName>().unwrap().to_string(), s);
        }
        assert!("boltzmann".parse::<KernelName>().is_err());
        assert!("rank:2".parse::<KernelName>().is_err());
        assert!("ga:x".parse::<MethodName>().is_err());
    }

    #[test]
    fn resolved_config_round_trips() {
        for name in presets::NAMES {
            let spec = presets::preset(name, false).unwrap();
            let text = to_toml(&spec);
            assert_eq!(parse_config_str(&text).unwrap(), spec, "{name}:\n{text}");
        }
    }
}
