use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use fadecap_cli::commands::CapacityMode;
use fadecap_cli::{run, CommandKind, Invocation};

/// Average capacity of frequency-selective Rayleigh fading channels with
/// correlated scattering: figure data, sweeps, and Monte Carlo validation.
#[derive(Parser)]
#[command(name = "fadecap", version)]
struct Cli {
    /// Scenario configuration file; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Write output here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Override the OU decay parameters, e.g. `--d 1,2,5`.
    #[arg(long, global = true)]
    d: Option<String>,

    /// Override the SNR grid: `min:max:points` (log-spaced) or a comma list.
    #[arg(long, global = true)]
    rho: Option<String>,

    /// Override the Monte Carlo seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Print the effective configuration and exit.
    #[arg(long, global = true)]
    dump_config: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    NoCsi,
    PartialCsi,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Decreasing rearrangements of the spectral fading variances (CSV).
    Variance,
    /// Average capacity over the SNR grid (CSV).
    Capacity {
        /// Which transmitter-knowledge modes to emit.
        #[arg(long, value_enum, default_value_t = ModeArg::Both)]
        mode: ModeArg,
    },
    /// Full (channel x SNR) cross product in long format (CSV).
    Sweep,
    /// Monte Carlo cross-check of the closed forms; nonzero exit on failure.
    Validate,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = match cli.command {
        Command::Variance => CommandKind::Variance,
        Command::Capacity { mode } => CommandKind::Capacity(match mode {
            ModeArg::NoCsi => CapacityMode::NoCsi,
            ModeArg::PartialCsi => CapacityMode::PartialCsi,
            ModeArg::Both => CapacityMode::Both,
        }),
        Command::Sweep => CommandKind::Sweep,
        Command::Validate => CommandKind::Validate,
    };
    let invocation = Invocation {
        command,
        config_path: cli.config,
        out: cli.out,
        d_override: cli.d,
        rho_override: cli.rho,
        seed_override: cli.seed,
        dump_config: cli.dump_config,
    };
    match run(&invocation) {
        Ok(output) => {
            let write_result = match &invocation.out {
                Some(path) => std::fs::write(path, &output.text),
                None => std::io::stdout().write_all(output.text.as_bytes()),
            };
            if let Err(e) = write_result {
                eprintln!("fadecap: {e}");
                return ExitCode::from(2);
            }
            if output.success {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("fadecap: {e}");
            ExitCode::from(2)
        }
    }
}
