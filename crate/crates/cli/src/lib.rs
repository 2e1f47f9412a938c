//! `psr-sim`: parameter sweeps, noise spectra, limit tables, phenomenological
//! squeezing, trace fitting and polarimetry from a TOML configuration.

pub mod commands;
pub mod config;
pub mod error;
pub mod ingest;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, ValueEnum};

pub use error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Transmission and 𝒢l maps over detuning and power.
    Sweep,
    /// Quadrature noise spectra relative to the QNL.
    Noise,
    /// Full response against its asymptotic limits.
    Limits,
    /// Phenomenological optimal-phase squeezing.
    Matsko,
    /// Fit the composite model to measured traces.
    Fit,
    /// Convert polarimeter voltages to rotation angles.
    Polarimetry,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Sweep => "sweep",
            Command::Noise => "noise",
            Command::Limits => "limits",
            Command::Matsko => "matsko",
            Command::Fit => "fit",
            Command::Polarimetry => "polarimetry",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "psr-sim", version, about)]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// TOML config file, or a bundled preset name
    /// (hot-vapour-d2, hot-vapour-d1, cold-atom-kerr).
    #[arg(long)]
    pub config: PathBuf,
    /// Output file. CSV sweeps write `<stem>.transmission.<ext>` and
    /// `<stem>.gl.<ext>` next to it.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Worker threads (default: all cores).
    #[arg(long, value_parser = clap::value_parser!(u16).range(1..))]
    pub jobs: Option<u16>,
    /// Follow the depletion of the driving field along the cell.
    #[arg(long)]
    pub deplete: bool,
}

/// Runs one invocation and returns the files written.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    let source = config::load_source(&cli.config)?;
    let cfg = config::parse(&source.text)?;
    if let Some(dir) = cli.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        if !dir.is_dir() {
            return Err(CliError::Config(format!(
                "output directory {} does not exist",
                dir.display()
            )));
        }
    }
    let ctx = commands::Context {
        config: cfg,
        base_dir: source.base_dir.clone(),
        deplete: cli.deplete,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs.map_or(0, usize::from))
        .build()
        .map_err(|e| CliError::Config(format!("--jobs: {e}")))?;
    log::info!(
        "{} with {} worker(s)",
        cli.command.name(),
        pool.current_num_threads()
    );
    let report = pool.install(|| commands::dispatch(cli.command, &ctx))?;
    let meta = output::Meta::new(cli.command.name(), &source.name, &source.text, cli.deplete);
    output::emit(&cli.out, cli.format == Format::Json, &meta, &report)
}
