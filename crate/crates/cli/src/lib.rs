//! Command-line driver: scenario sweeps, figure-data reproduction, and
//! Monte Carlo validation, emitting CSV or a check report.

pub mod commands;
pub mod config;

use std::fmt;
use std::path::PathBuf;

use commands::CapacityMode;
use config::ScenarioConfig;

/// Parsed invocation, independent of the argument parser.
#[derive(Debug, Clone)]
pub struct Invocation {
    pub command: CommandKind,
    pub config_path: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub d_override: Option<String>,
    pub rho_override: Option<String>,
    pub seed_override: Option<u64>,
    pub dump_config: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Variance,
    Capacity(CapacityMode),
    Sweep,
    Validate,
}

/// Output of a run: the text to write and whether the process should exit
/// successfully (validation failures flip it).
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub text: String,
    pub success: bool,
}

#[derive(Debug)]
pub enum CliError {
    Config(config::ConfigError),
    Io(std::io::Error),
    Compute(fadecap::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Config(e) => write!(f, "{e}"),
            Self::Io(e) => write!(f, "io error: {e}"),
            Self::Compute(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<config::ConfigError> for CliError {
    fn from(e: config::ConfigError) -> Self {
        Self::Config(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e)
    }
}

impl From<fadecap::Error> for CliError {
    fn from(e: fadecap::Error) -> Self {
        Self::Compute(e)
    }
}

/// Effective configuration: file (or defaults) with flag overrides applied.
pub fn effective_config(inv: &Invocation) -> Result<ScenarioConfig, CliError> {
    let mut cfg = match &inv.config_path {
        Some(path) => config::parse(&std::fs::read_to_string(path)?)?,
        None => ScenarioConfig::default(),
    };
    if let Some(spec) = &inv.d_override {
        cfg.ds = config::parse_d_list(spec)?;
        cfg.ab = None;
    }
    if let Some(spec) = &inv.rho_override {
        cfg.rho_grid = config::parse_rho_spec(spec)?;
    }
    if let Some(seed) = inv.seed_override {
        if let Some(mc) = &mut cfg.mc {
            mc.seed = seed;
        }
    }
    Ok(cfg)
}

/// Execute the invocation and return its output text.
pub fn run(inv: &Invocation) -> Result<RunOutput, CliError> {
    let cfg = effective_config(inv)?;
    if inv.dump_config {
        return Ok(RunOutput {
            text: config::dump(&cfg),
            success: true,
        });
    }
    let out = match inv.command {
        CommandKind::Variance => RunOutput {
            text: commands::cmd_variance(&cfg)?,
            success: true,
        },
        CommandKind::Capacity(mode) => RunOutput {
            text: commands::cmd_capacity(&cfg, mode)?,
            success: true,
        },
        CommandKind::Sweep => RunOutput {
            text: commands::cmd_sweep(&cfg)?,
            success: true,
        },
        CommandKind::Validate => {
            let (text, success) = commands::cmd_validate(&cfg)?;
            RunOutput { text, success }
        }
    };
    Ok(out)
}
