use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use tsl_core::commands::{self, Artifact};
use tsl_core::config::{RunConfig, DESIGN_CONFIG};
use tsl_core::Error;

/// Yaw stability, transfer functions and noise budget of a suspended cavity.
///
/// Exit status: 0 success, 2 configuration or usage error, 3 numerical failure.
#[derive(Parser)]
#[command(name = "tsl", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Configuration file; the built-in design configuration when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Intracavity power override, W.
    #[arg(long, global = true)]
    power: Option<f64>,

    /// Measured transfer function CSV to fit (repeatable, order preserved).
    #[arg(long, global = true)]
    fit: Vec<PathBuf>,

    /// Synthesize-then-fit round trip check.
    #[arg(long, global = true)]
    selftest: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Mode frequencies over the power grid and critical powers.
    Stability,
    /// Exact and approximate mode frequencies at one power.
    Modes,
    /// Synthesized transfer function and resonance fits.
    Tf,
    /// Displacement noise budget and QRPN dominance band.
    Noise,
    /// Write the shipped configuration files.
    PaperDefaults,
}

fn init_threads() -> Result<(), Error> {
    let Ok(raw) = std::env::var("TSL_NUM_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| Error::Config {
        key: "TSL_NUM_THREADS".into(),
        message: format!("`{raw}` is not a positive integer"),
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Config {
            key: "TSL_NUM_THREADS".into(),
            message: e.to_string(),
        })
}

fn run(cli: &Cli) -> Result<Vec<Artifact>, Error> {
    init_threads()?;
    if let Some(p) = cli.power {
        if !(p.is_finite() && p >= 0.0) {
            return Err(Error::Config {
                key: "--power".into(),
                message: format!("{p} is not a non-negative power"),
            });
        }
    }
    if matches!(cli.command, Command::PaperDefaults) {
        return Ok(commands::cmd_defaults());
    }
    let cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::parse(DESIGN_CONFIG)?,
    };
    match cli.command {
        Command::Stability => commands::cmd_stability(&cfg),
        Command::Modes => commands::cmd_modes(&cfg, cli.power),
        Command::Tf => commands::cmd_tf(&cfg, cli.power, &cli.fit, cli.selftest),
        Command::Noise => commands::cmd_noise(&cfg, cli.power),
        Command::PaperDefaults => unreachable!(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|a| commands::write_artifacts(&cli.out, &a));
    match result {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("tsl: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
