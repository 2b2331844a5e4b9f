//! Command-line front end.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub mod commands;
pub mod config;
pub mod csv;
pub mod svg;

pub use config::{parse_config, parse_config_str, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("parse error{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Parse { line: Option<usize>, message: String },

    #[error("invalid configuration: {0}")]
    Validation(String),

    #[error(transparent)]
    Physics(#[from] crate::Error),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("oracle check failed: {failed} of {total} entries exceed {tolerance:e} rad")]
    OracleFailed { failed: usize, total: usize, tolerance: f64 },
}

impl CliError {
    /// 1 for physics or validation failures, 2 for I/O and parse failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Io { .. } => 2,
            CliError::Validation(_) | CliError::Physics(_) | CliError::OracleFailed { .. } => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "channelspin", version, about = "Spin precession of channeled particles in bent crystals")]
pub struct Cli {
    /// TOML configuration file; defaults are used when omitted
    #[arg(short, long, global = true)]
    pub config: Option<PathBuf>,

    /// Output directory, overrides [output] dir
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// One trajectory in the bent crystal
    Single,
    /// Average over the entry grid for each configured angle
    Ensemble,
    /// Ensemble with Gaussian angle and energy spread
    Divergence,
    /// Bent minus straight rotation angle against the Lyuboshitz relation
    Curvature,
    /// Bent crystal with Omega scaled by [ensemble] omega_scale, next to a straight one
    OmegaScaled,
    /// Compare the closed form with RK4 for seeded random entries
    OracleCheck,
    /// Print the effective configuration
    ShowConfig,
}

pub fn load(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => parse_config(path)?,
        None => RunConfig::default(),
    };
    if let Some(dir) = &cli.output {
        cfg.output.dir = dir.clone();
    }
    Ok(cfg)
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = load(cli)?;
    let written = match cli.command {
        Command::Single => commands::single(&cfg)?,
        Command::Ensemble => commands::ensemble(&cfg)?,
        Command::Divergence => commands::divergence(&cfg)?,
        Command::Curvature => commands::curvature(&cfg)?,
        Command::OmegaScaled => commands::omega_scaled(&cfg)?,
        Command::OracleCheck => {
            let report = commands::oracle_check(&cfg)?;
            print!("{}", report.render());
            return report.into_result();
        }
        Command::ShowConfig => {
            print!("{}", cfg.to_toml());
            return Ok(());
        }
    };
    for path in written {
        println!("{}", path.display());
    }
    Ok(())
}
