//! `wernerlab` command-line interface.
//!
//! Every command merges built-in defaults, an optional JSON config file and
//! command-line flags (later wins), runs deterministically from its seeds and,
//! with `--out`, writes its tables plus a `manifest.json` that `replay`
//! accepts.
//!
//! Exit codes: 0 success, 1 invalid input or runtime error, 2 a required
//! certificate verdict was not met.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use commands::{CommandConfig, Filtered, Outcome, Task};
use config::{flags_value, merge, read_config};

#[derive(Parser)]
#[command(name = "wernerlab", version, about = "Entanglement, steering and nonlocality certification for Werner states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON file with configuration keys; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; without it results go to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one certificate family over a (d, v) grid.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        flags: SweepFlags,
    },
    /// Noisy qutrit Werner state through tomography, filtering and certification.
    Pipeline {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        flags: PipelineFlags,
    },
    /// Symmetric extension optima over (d, k, side, flavor, v).
    ExtendTable {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        flags: ExtendFlags,
    },
    /// Simulate counts and reconstruct by maximum likelihood.
    TomoDemo {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        flags: TomoFlags,
    },
    /// Solve a conic program stored as JSON.
    Solve {
        program: PathBuf,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        flags: SolveFlags,
    },
    /// Re-run the configuration recorded in a manifest.
    Replay {
        manifest: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Grid arguments accept `a:step:b`, `a..b` or comma lists.
#[derive(Args, Serialize)]
struct SweepFlags {
    #[arg(long, value_enum)]
    task: Option<Task>,
    #[arg(long)]
    d: Option<String>,
    #[arg(long)]
    v: Option<String>,
    #[arg(long)]
    k: Option<String>,
    #[arg(long, value_delimiter = ',')]
    flavor: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',')]
    side: Option<Vec<String>>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    settings: Option<String>,
    #[arg(long, value_enum)]
    filtered: Option<Filtered>,
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    sdp_tol: Option<f64>,
}

#[derive(Args, Serialize)]
struct PipelineFlags {
    #[arg(long)]
    v: Option<f64>,
    #[arg(long)]
    depol: Option<f64>,
    #[arg(long = "eps")]
    coherent_eps: Option<f64>,
    #[arg(long)]
    noise_seed: Option<u64>,
    #[arg(long)]
    target_fidelity: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long)]
    bootstrap: Option<usize>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    sr_settings: Option<usize>,
    #[arg(long)]
    sr_restarts: Option<usize>,
    /// Certificates that must pass on the filtered state.
    #[arg(long, value_delimiter = ',')]
    require: Option<Vec<String>>,
    /// Certificates that must pass on the unfiltered state.
    #[arg(long, value_delimiter = ',')]
    require_before: Option<Vec<String>>,
}

#[derive(Args, Serialize)]
struct ExtendFlags {
    #[arg(long)]
    d: Option<String>,
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    v: Option<String>,
    #[arg(long, value_delimiter = ',')]
    flavor: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',')]
    side: Option<Vec<String>>,
    #[arg(long)]
    critical: Option<bool>,
    #[arg(long)]
    sdp_tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Serialize)]
struct TomoFlags {
    #[arg(long)]
    v: Option<f64>,
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    filtered: Option<bool>,
    #[arg(long)]
    depol: Option<f64>,
    #[arg(long = "eps")]
    coherent_eps: Option<f64>,
    /// Reconstruct from this counts CSV; its JSON sidecar must sit next to it.
    #[arg(long)]
    counts: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct SolveFlags {
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

fn build<T, F>(common: &Common, flags: &F, wrap: impl FnOnce(T) -> CommandConfig) -> Result<CommandConfig>
where
    T: serde::de::DeserializeOwned + Serialize + Default,
    F: Serialize,
{
    let file = read_config(common.config.as_deref())?;
    Ok(wrap(merge(file.as_ref(), flags_value(flags)?)?))
}

fn run(cli: Cli) -> Result<Outcome> {
    let (cfg, out) = match cli.command {
        Command::Sweep { common, flags } => (build(&common, &flags, CommandConfig::Sweep)?, common.out),
        Command::Pipeline { common, flags } => (build(&common, &flags, CommandConfig::Pipeline)?, common.out),
        Command::ExtendTable { common, flags } => (build(&common, &flags, CommandConfig::ExtendTable)?, common.out),
        Command::TomoDemo { common, flags } => (build(&common, &flags, CommandConfig::TomoDemo)?, common.out),
        Command::Solve { program, common, flags } => {
            let mut flags = flags_value(&flags)?;
            flags["program"] = serde_json::to_value(&program)?;
            let file = read_config(common.config.as_deref())?;
            (CommandConfig::Solve(merge(file.as_ref(), flags)?), common.out)
        }
        Command::Replay { manifest, out } => return commands::replay(&manifest, out.as_deref()),
    };
    cfg.run(out.as_deref())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::VerdictFailure) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
