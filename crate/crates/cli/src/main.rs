use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kga_cli::{execute, CliError, RunRequest};
use kga_core::experiments::presets;

/// Kinetic genetic-algorithm experiments.
#[derive(Debug, Parser)]
#[command(name = "kga", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run an experiment and write CSV tables plus manifest.json.
    Run {
        /// TOML configuration file.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Named preset (see `kga presets`); the base for `--config` overrides.
        #[arg(long)]
        preset: Option<String>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Master seed, overriding the configuration.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads for independent runs.
        #[arg(long, env = "KGA_THREADS")]
        threads: Option<usize>,
        /// Use 10^6 particles for the steady-state preset.
        #[arg(long)]
        full_scale: bool,
    },
    /// List the compiled-in presets.
    Presets,
    /// Check a configuration and print it with all defaults resolved.
    Validate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        preset: Option<String>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { config, preset, out, seed, threads, full_scale } => {
            if config.is_none() && preset.is_none() {
                return Err(CliError::Config("pass --config or --preset".into()));
            }
            if threads == Some(0) {
                return Err(CliError::Config("--threads must be at least 1".into()));
            }
            let req = RunRequest { config, preset, seed, full_scale };
            let (spec, preset) = req.resolve_named()?;
            let manifest = execute(&spec, &out, preset, threads)?;
            for f in &manifest.files {
                println!("{}  {}", f.sha256, out.join(&f.path).display());
            }
            Ok(())
        }
        Command::Presets => {
            for name in presets::NAMES {
                println!("{name:<6} {}", presets::description(name).unwrap_or(""));
            }
            Ok(())
        }
        Command::Validate { config, preset } => {
            if config.is_none() && preset.is_none() {
                return Err(CliError::Config("pass --config or --preset".into()));
            }
            let spec = RunRequest { config, preset, ..RunRequest::default() }.resolve()?;
            print!("{}", kga_cli::to_toml(&spec));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("kga: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
