//! `kgwave`: classify, simulate and analyze Klein-Gordon plane waves.

mod commands;
mod config;
mod error;
mod output;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Context;
use config::RunConfig;
use error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "kgwave", version, about = "Stability toolkit for Klein-Gordon plane waves")]
struct Cli {
    /// TOML run configuration; every key defaults to the reference experiment.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory, overriding `output.dir`.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Simulate even when the wave is spectrally unstable.
    #[arg(long, global = true)]
    force: bool,

    /// Worker threads for parallel scans.
    #[arg(long, global = true, value_name = "N", default_value_t = 1)]
    threads: usize,

    /// Comma-separated snapshot times, overriding `output.snapshot_times`.
    #[arg(long, global = true, value_name = "T1,T2,...", value_delimiter = ',')]
    snapshot_times: Option<Vec<f64>>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form and numerical stability verdicts.
    Classify,
    /// Run the splitting integrator and write the diagnostics CSV.
    Simulate,
    /// Write the pencil spectrum over the frequency scan.
    Spectrum,
    /// Power-law fit of a diagnostics column over the trailing window.
    Fit {
        csv: PathBuf,
        #[arg(long, default_value = "theta_l2")]
        column: String,
        #[arg(long, default_value_t = 0.25)]
        window_fraction: f64,
    },
    /// Energy breakdown of a snapshot CSV.
    Energy { snapshot: PathBuf },
}

fn load(cli: &Cli) -> Result<Context> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let src =
                fs::read_to_string(path).map_err(|source| CliError::MissingInput { path: path.clone(), source })?;
            RunConfig::parse(&src)?.0
        }
        None => RunConfig::defaults()?.0,
    };
    if let Some(dir) = &cli.out {
        cfg.output.dir = dir.clone();
    }
    if let Some(times) = &cli.snapshot_times {
        cfg.output.snapshot_times = times.clone();
    }
    // re-validate so that overrides obey the same rules as file values;
    // lines refer to the regenerated document and would mislead
    let (cfg, setup) = RunConfig::parse(&cfg.to_toml()).map_err(|e| match e {
        CliError::Config { key, message, .. } => CliError::Config { key, line: None, message },
        other => other,
    })?;
    Ok(Context { cfg, setup, force: cli.force, threads: cli.threads })
}

fn run(cli: Cli) -> Result<u8> {
    if cli.threads == 0 {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    match &cli.command {
        Command::Fit { csv, column, window_fraction } => commands::fit(csv, column, *window_fraction),
        Command::Classify => commands::classify(&load(&cli)?),
        Command::Simulate => commands::simulate(&load(&cli)?),
        Command::Spectrum => commands::spectrum(&load(&cli)?),
        Command::Energy { snapshot } => commands::energy(&load(&cli)?, snapshot),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 64 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
