use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use dipbound_cli::config::{self, Subcommand};
use dipbound_cli::{execute, write_atomic, CliError, ConfigError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Command {
    /// Characteristic lengths and energies of a physical pair.
    Scales,
    /// Adiabatic potential curves on a radial grid.
    Adiabats,
    /// WKB bound-state estimate and node counts versus wall radius.
    Wkb,
    /// Bound states of one model in an energy window.
    Bound,
    /// s-wave scattering length of the Lennard-Jones model.
    Scatlen,
    /// Parameter sweep.
    Scan,
    /// Use the `subcommand` named in the config file.
    Run,
}

impl Command {
    fn subcommand(self) -> Option<Subcommand> {
        Some(match self {
            Command::Scales => Subcommand::Scales,
            Command::Adiabats => Subcommand::Adiabats,
            Command::Wkb => Subcommand::Wkb,
            Command::Bound => Subcommand::Bound,
            Command::Scatlen => Subcommand::Scatlen,
            Command::Scan => Subcommand::Scan,
            Command::Run => return None,
        })
    }
}

/// Coupled-channels bound states of field-oriented dipoles.
#[derive(Debug, Parser)]
#[command(name = "dipbound", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// TOML run configuration.
    config: PathBuf,
    /// CSV destination (stdout when absent and the config names none).
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Worker threads for scans.
    #[arg(short = 'j', long)]
    workers: Option<usize>,
    /// Fixed L_max for every basis block.
    #[arg(long)]
    lmax: Option<u32>,
    /// Energy tolerance, in the configured energy unit.
    #[arg(long = "tol-e")]
    tol_e: Option<f64>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&cli.config).map_err(|e| ConfigError(format!("{}: {e}", cli.config.display())))?;
    let mut cfg = config::parse(&text).map_err(|e| ConfigError(format!("{}: {e}", cli.config.display())))?;
    let sub = match (cli.command.subcommand(), cfg.subcommand) {
        (Some(a), Some(b)) if a != b => {
            return Err(ConfigError(format!("command line asks for {a:?} but the config names {b:?}")).into());
        }
        (Some(a), _) | (None, Some(a)) => a,
        (None, None) => return Err(ConfigError("`run` needs a `subcommand` field in the config".into()).into()),
    };
    cfg.subcommand = Some(sub);
    if let Some(o) = cli.output {
        cfg.output = Some(o);
    }
    if let Some(w) = cli.workers {
        cfg.workers = Some(w);
    }
    if let Some(l) = cli.lmax {
        cfg.override_l_max(l);
    }
    if let Some(t) = cli.tol_e {
        cfg.energy.tol = t;
    }
    let csv = execute(&cfg, sub)?;
    match &cfg.output {
        Some(path) => write_atomic(path, &csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dipbound: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
