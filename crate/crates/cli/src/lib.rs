//! `flrw-lab`: command-line front end for `flrw-core`.
//!
//! Every command resolves its config (preset or default, then `--config` file,
//! then flags), writes its artifacts into the output directory together with a
//! `manifest.json`, and prints a JSON summary on stdout.
//!
//! Exit codes: 0 success, 2 invalid config, 3 runtime failure (a run or sweep that
//! reached its horizon without blowing up, or an I/O error).

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub mod commands;
pub mod config;
pub mod output;

pub use output::RunManifest;

/// Environment variable that overrides the default output directory.
pub const OUT_ENV: &str = "FLRW_LAB_OUT";

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("runtime failure: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

impl From<flrw_core::Error> for CliError {
    fn from(e: flrw_core::Error) -> Self {
        match e {
            flrw_core::Error::Horizon { .. } | flrw_core::Error::Serialization(_) => {
                CliError::Runtime(e.to_string())
            }
            _ => CliError::Config(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "flrw-lab", version, about = "Blow-up exponents, lifespan bounds and solvers for damped waves on FLRW backgrounds")]
pub struct Cli {
    /// Output directory
    #[arg(long, global = true, env = OUT_ENV, default_value = "out")]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Critical exponents, thresholds, μ* and (with --flrw) w*
    Exponents(ExponentsArgs),
    /// Region label and lifespan bounds at one point
    Classify(ClassifyArgs),
    /// Region map over a parameter plane (CSV + SVG)
    Map(MapArgs),
    /// Kato-lemma thresholds, sequences and envelopes
    #[command(subcommand)]
    Kato(KatoCommand),
    /// Comparison ODE runs and sweeps
    #[command(subcommand)]
    Ode(OdeCommand),
    /// Radial PDE runs and sweeps
    #[command(subcommand)]
    Pde(PdeCommand),
}

#[derive(Debug, Args)]
pub struct ExponentsArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
    /// Take (α, μ) from the FLRW map of (n, w)
    #[arg(long)]
    pub flrw: bool,
    #[arg(long, allow_negative_numbers = true)]
    pub w: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MapPreset {
    Fig1,
    Fig2,
}

#[derive(Debug, Args)]
pub struct MapArgs {
    #[arg(long, value_enum)]
    pub preset: Option<MapPreset>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum KatoCommand {
    /// Subcritical blow-up threshold A₀^{-(p-1)/M}
    Threshold(KatoThresholdArgs),
    /// b_j, log C_j, a_j table
    Sequences(KatoSequencesArgs),
    /// Divergence time of the critical envelope
    Envelope(KatoEnvelopeArgs),
}

#[derive(Debug, Args)]
pub struct KatoThresholdArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long = "A0", alias = "a0")]
    pub a0: Option<f64>,
    #[arg(long = "A1", alias = "a1")]
    pub a1: Option<f64>,
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long = "T0", alias = "t0")]
    pub t0: Option<f64>,
    #[arg(long = "T1", alias = "t1")]
    pub t1: Option<f64>,
}

#[derive(Debug, Args)]
pub struct KatoCriticalArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long = "A0", alias = "a0")]
    pub a0: Option<f64>,
    #[arg(long = "A1", alias = "a1")]
    pub a1: Option<f64>,
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long = "T0", alias = "t0")]
    pub t0: Option<f64>,
    #[arg(long = "T1", alias = "t1")]
    pub t1: Option<f64>,
    #[arg(long = "C-R", alias = "c-r")]
    pub c_r: Option<f64>,
}

#[derive(Debug, Args)]
pub struct KatoSequencesArgs {
    #[command(flatten)]
    pub kato: KatoCriticalArgs,
    #[arg(long)]
    pub jmax: Option<u32>,
}

#[derive(Debug, Args)]
pub struct KatoEnvelopeArgs {
    #[command(flatten)]
    pub kato: KatoCriticalArgs,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub horizon_decades: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RunPreset {
    HeatlikeN2,
    CriticalN2,
}

#[derive(Debug, Subcommand)]
pub enum OdeCommand {
    Run(OdeArgs),
    Sweep(OdeSweepArgs),
}

#[derive(Debug, Args)]
pub struct OdeArgs {
    #[arg(long, value_enum)]
    pub preset: Option<RunPreset>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long = "A1", alias = "a1")]
    pub a1: Option<f64>,
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub f_init_scale: Option<f64>,
    #[arg(long)]
    pub df_init_scale: Option<f64>,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub rel_tol: Option<f64>,
    #[arg(long)]
    pub abs_tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EpsGridArgs {
    #[arg(long)]
    pub eps_min: Option<f64>,
    #[arg(long)]
    pub eps_max: Option<f64>,
    #[arg(long)]
    pub eps_points: Option<usize>,
}

#[derive(Debug, Args)]
pub struct OdeSweepArgs {
    #[command(flatten)]
    pub ode: OdeArgs,
    #[command(flatten)]
    pub grid: EpsGridArgs,
}

#[derive(Debug, Subcommand)]
pub enum PdeCommand {
    Run(PdeArgs),
    Sweep(PdeSweepArgs),
}

#[derive(Debug, Args)]
pub struct PdeArgs {
    #[arg(long, value_enum)]
    pub preset: Option<RunPreset>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub dr: Option<f64>,
    #[arg(long)]
    pub cfl: Option<f64>,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub sample_every: Option<usize>,
}

#[derive(Debug, Args)]
pub struct PdeSweepArgs {
    #[command(flatten)]
    pub pde: PdeArgs,
    #[command(flatten)]
    pub grid: EpsGridArgs,
}

/// Outcome of one command.
#[derive(Debug, Clone)]
pub struct Execution {
    pub manifest: RunManifest,
    /// JSON summary printed on stdout.
    pub summary: String,
    pub exit_code: i32,
}

pub fn execute(cli: &Cli) -> Result<Execution, CliError> {
    let out = &cli.out;
    match &cli.command {
        Command::Exponents(a) => commands::exponents(a, out),
        Command::Classify(a) => commands::classify(a, out),
        Command::Map(a) => commands::map(a, out),
        Command::Kato(KatoCommand::Threshold(a)) => commands::kato_threshold(a, out),
        Command::Kato(KatoCommand::Sequences(a)) => commands::kato_sequences(a, out),
        Command::Kato(KatoCommand::Envelope(a)) => commands::kato_envelope(a, out),
        Command::Ode(OdeCommand::Run(a)) => commands::ode_run(a, out),
        Command::Ode(OdeCommand::Sweep(a)) => commands::ode_sweep(a, out),
        Command::Pde(PdeCommand::Run(a)) => commands::pde_run(a, out),
        Command::Pde(PdeCommand::Sweep(a)) => commands::pde_sweep(a, out),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(ex) => {
            print!("{}", ex.summary);
            ex.exit_code
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
