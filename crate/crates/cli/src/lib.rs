//! Library side of the `kga` command: configuration files, experiment
//! dispatch and deterministic artifacts.

pub mod config;
pub mod output;

use std::path::{Path, PathBuf};

use kga_core::experiments::{run_experiment, ExperimentSpec};
use thiserror::Error;

pub use config::{parse_config, parse_config_str, to_toml, ConfigFile};
pub use output::{emit_csv, RunManifest};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("runtime error: {0}")]
    Runtime(#[from] kga_core::Error),

    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Runtime(_) | CliError::Io(_) => 2,
        }
    }
}

/// Where a run's configuration comes from.
#[derive(Debug, Clone, Default)]
pub struct RunRequest {
    pub config: Option<PathBuf>,
    pub preset: Option<String>,
    pub seed: Option<u64>,
    pub full_scale: bool,
}

impl RunRequest {
    /// Reads and resolves the configuration. A `--preset` on the command
    /// line supplies the base for a file that names neither a preset nor a
    /// kind.
    pub fn resolve(&self) -> Result<ExperimentSpec, CliError> {
        self.resolve_named().map(|(spec, _)| spec)
    }

    /// As [`RunRequest::resolve`], also returning the preset the
    /// configuration was built on, if it named one.
    pub fn resolve_named(&self) -> Result<(ExperimentSpec, Option<String>), CliError> {
        let mut file = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
                if text.trim().is_empty() && self.preset.is_none() {
                    return Err(CliError::Config(format!("{}: empty configuration", path.display())));
                }
                config::parse_file(&text)?
            }
            None => ConfigFile::default(),
        };
        if file.preset.is_none() && file.kind.is_none() {
            file.preset = self.preset.clone();
        }
        if self.full_scale {
            file.full_scale = Some(true);
        }
        if let Some(seed) = self.seed {
            file.seed = Some(seed);
        }
        let preset = file.preset.clone();
        Ok((file.resolve()?, preset))
    }
}

/// Runs `spec` on a pool of `threads` workers (all cores when `None`) and
/// writes the tables and `manifest.json` into `out_dir`.
pub fn execute(
    spec: &ExperimentSpec,
    out_dir: &Path,
    preset: Option<String>,
    threads: Option<usize>,
) -> Result<RunManifest, CliError> {
    let started = chrono::Utc::now().to_rfc3339();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t.max(1));
    }
    let pool = builder.build().map_err(|e| CliError::Io(format!("thread pool: {e}")))?;
    let result = pool.install(|| run_experiment(spec))?;
    let files = emit_csv(&result, out_dir)?;
    let manifest = RunManifest {
        tool: "kga",
        version: env!("CARGO_PKG_VERSION"),
        preset,
        master_seed: spec.master_seed,
        threads,
        started,
        finished: chrono::Utc::now().to_rfc3339(),
        config_toml: to_toml(spec),
        config: spec.clone(),
        files,
        convergence: result.tables.convergence_summary.clone(),
    };
    if let Err(e) = output::write_manifest(&manifest, out_dir) {
        let paths: Vec<PathBuf> = manifest.files.iter().map(|f| out_dir.join(&f.path)).collect();
        output::cleanup(&paths);
        return Err(e);
    }
    Ok(manifest)
}
