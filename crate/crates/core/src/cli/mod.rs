//! Command-line front end: JSON config in, CSV / JSON / plot files out.

pub mod commands;
pub mod config;
pub mod output;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::blockcore::C64;

pub use config::{
    parse_config, random_lattice, ComplexValue, ConfigError, Format, Initial, PresetName, PresetSpec,
    RunConfig,
};
pub use output::{fmt_complex, fmt_real, IoError, Outputs};

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const CONFIG: i32 = 2;
    pub const NUMERICAL: i32 = 3;
    pub const IO: i32 = 4;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("numerical failure: {0}")]
    Numerical(#[from] crate::Error),
    /// Numerical failure after which a partial report is still written.
    #[error("numerical failure: {source}")]
    Partial { outputs: Box<Outputs>, source: crate::Error },
    #[error(transparent)]
    Io(#[from] IoError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => exit::CONFIG,
            CliError::Numerical(_) | CliError::Partial { .. } => exit::NUMERICAL,
            CliError::Io(_) => exit::IO,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "fktoda", version, about = "Full Kostant-Toda lattice, block Jacobi operators and matrix orthogonal polynomials")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate the lattice and write the trajectory.
    Evolve(CommonArgs),
    /// Integrate and evaluate every flow residual, the frozen control and the spectral checks.
    Verify(CommonArgs),
    /// Compare blocks reconstructed from modulated moments with the integrated lattice at --t.
    Reconstruct(CommonArgs),
    /// Resolvent corner at the z samples, and recurrence blocks from contour integrals.
    Weyl(CommonArgs),
    /// Eigenvalues of the truncated operator.
    Spectrum(CommonArgs),
    /// Block moments of the normalized functional.
    Moments(CommonArgs),
}

#[derive(Debug, clap::Args)]
pub struct CommonArgs {
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Time: end of integration (evolve, verify, reconstruct) or evaluation time (weyl, spectrum, moments).
    #[arg(long)]
    pub t: Option<f64>,
    /// Sample point "re,im"; repeatable. Overrides the config samples.
    #[arg(long = "z", value_parser = parse_z, allow_hyphen_values = true)]
    pub z: Vec<C64>,
    /// Output directory; overrides the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format; repeatable. Overrides the config.
    #[arg(long = "format", value_enum)]
    pub format: Vec<Format>,
}

fn parse_z(s: &str) -> Result<C64, String> {
    let (re, im) = s.split_once(',').ok_or_else(|| format!("expected \"re,im\", got {s:?}"))?;
    let p = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}"));
    Ok(C64::new(p(re)?, p(im)?))
}

/// Files written by a successful run.
#[derive(Debug)]
pub struct RunSummary {
    pub written: Vec<PathBuf>,
}

fn load(args: &CommonArgs) -> Result<commands::Job, CliError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|source| IoError { path: args.config.clone(), source })?;
    let cfg = parse_config(&text)?;
    if let Some(t) = args.t {
        if !(t.is_finite() && t >= 0.0) {
            return Err(ConfigError { path: "--t".into(), reason: "must be finite and nonnegative".into() }.into());
        }
    }
    let s0 = cfg.initial_state()?;
    let formats = if args.format.is_empty() { cfg.formats.clone() } else { args.format.clone() };
    let out = args.out.clone().unwrap_or_else(|| cfg.output_dir.clone());
    Ok(commands::Job { cfg, s0, t: args.t, z: args.z.clone(), formats, out })
}

fn write(outputs: &Outputs, dir: &Path) -> Result<RunSummary, CliError> {
    Ok(RunSummary { written: outputs.write(dir)? })
}

type Handler = fn(&commands::Job) -> Result<Outputs, CliError>;

/// Run one subcommand to completion, writing its files.
pub fn run(cli: &Cli) -> Result<RunSummary, CliError> {
    let (args, f): (&CommonArgs, Handler) = match &cli.command {
        Command::Evolve(a) => (a, commands::evolve),
        Command::Verify(a) => (a, commands::verify),
        Command::Reconstruct(a) => (a, commands::reconstruct),
        Command::Weyl(a) => (a, commands::weyl),
        Command::Spectrum(a) => (a, commands::spectrum_cmd),
        Command::Moments(a) => (a, commands::moments),
    };
    let job = load(args)?;
    match f(&job) {
        Ok(outputs) => write(&outputs, &job.out),
        Err(CliError::Partial { outputs, source }) => {
            outputs.write(&job.out)?;
            Err(CliError::Numerical(source))
        }
        Err(e) => Err(e),
    }
}

/// Entry point used by the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::CONFIG } else { exit::OK };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(summary) => {
            for p in summary.written {
                println!("{}", p.display());
            }
            exit::OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
