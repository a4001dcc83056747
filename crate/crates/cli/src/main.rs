//! `gmlab` — batch experiment runner for chains with long memory.
//!
//! Every subcommand reads its parameters from the command line, optionally
//! backed by `--config <file>` (a flat JSON object whose keys are the long
//! flag names; explicit flags win), runs one experiment, writes
//! self-describing artifacts into `--out`, and prints a short summary.
//! Runs are deterministic: identical resolved configurations produce
//! byte-identical artifact bodies, and with `--no-timestamp` the whole
//! files match byte for byte.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numeric precision or
//! invariant failure, 4 instance too large.

mod artifact;
mod commands;
mod config;
mod error;

use clap::{Args, Parser, Subcommand};
use commands::OutputOpts;
use config::{pick, pick_required, EnvelopeSource, FileConfig};
use error::CliError;
use gmlab_core::gfunctions::DEFAULT_TOL;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "gmlab",
    version,
    about = "Simulation and diagnostics for chains with long memory",
    propagate_version = true
)]
struct Cli {
    /// JSON config file; keys mirror the long flag names, flags override it
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Output directory for artifacts (default .)
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Artifact filename stem (default: the subcommand's standard stem)
    #[arg(long, global = true)]
    label: Option<String>,

    /// Omit the wall-clock line from artifact headers, making repeated runs
    /// byte-identical
    #[arg(long, global = true)]
    no_timestamp: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Inspect the built-in kernel gallery
    Examples {
        #[command(subcommand)]
        what: ExamplesCmd,
    },
    /// Simulate one path and write it as CSV
    Simulate(SimulateArgs),
    /// Multi-path accumulated-Hellinger diagnostic comparing two starts
    Hellinger(HellingerArgs),
    /// Tabulate analytic variation bounds and their partial sums
    Svar(SvarArgs),
    /// Finite surrogate kernel: stationary distribution and uniqueness probe
    Transfer(TransferArgs),
    /// Symbol-magnitude growth and window occupancy along simulated paths
    Escape(EscapeArgs),
    /// Derive a dominating envelope and check it (optionally sample with it)
    Envelope(EnvelopeArgs),
    /// Run the full invariant suite on one kernel
    Check(CheckArgs),
}

#[derive(Subcommand)]
enum ExamplesCmd {
    /// List the kernel families with parameters and descriptions
    List,
}

#[derive(Args)]
struct SimulateArgs {
    /// Kernel spec, e.g. "hulse" or "markov:file=m.json"
    #[arg(long)]
    gfn: Option<String>,
    /// Initial context literal, e.g. "const:0" or "word:1,0;tail=0"
    #[arg(long)]
    init: Option<String>,
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct HellingerArgs {
    #[arg(long)]
    gfn: Option<String>,
    /// Reference start (the conditional the ratio divides by)
    #[arg(long)]
    init_a: Option<String>,
    /// Comparison start (paths are sampled under this one)
    #[arg(long)]
    init_b: Option<String>,
    #[arg(long)]
    paths: Option<u64>,
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct SvarArgs {
    #[arg(long)]
    gfn: Option<String>,
    /// Largest depth tabulated
    #[arg(long)]
    n_max: Option<u64>,
    /// Number of geometric grid points
    #[arg(long)]
    points: Option<usize>,
}

#[derive(Args)]
struct TransferArgs {
    #[arg(long)]
    gfn: Option<String>,
    /// Word length of the surrogate states
    #[arg(long)]
    depth: Option<usize>,
    /// Retained symbols (defaults to the whole alphabet when finite)
    #[arg(long)]
    truncation: Option<usize>,
    /// Random starting distributions for the uniqueness probe
    #[arg(long)]
    starts: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct EscapeArgs {
    #[arg(long)]
    gfn: Option<String>,
    #[arg(long)]
    init: Option<String>,
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long)]
    paths: Option<u64>,
    /// Occupancy window: fraction of paths with |symbol value| <= window
    #[arg(long)]
    window: Option<i64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct EnvelopeArgs {
    #[arg(long)]
    gfn: Option<String>,
    /// Where the envelope comes from: "builtin" or "var1"
    #[arg(long)]
    source: Option<String>,
    /// Base context for the var1 derivation
    #[arg(long)]
    base: Option<String>,
    /// Contexts sampled by the domination check
    #[arg(long)]
    contexts: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tol: Option<f64>,
    /// When positive, run the rejection sampler at --target until this many
    /// proposals were consumed and record the acceptance rate
    #[arg(long)]
    proposals: Option<u64>,
    /// Context the rejection-sampling measurement draws from
    #[arg(long)]
    target: Option<String>,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    gfn: Option<String>,
    /// Contexts sampled per invariant
    #[arg(long)]
    contexts: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tol: Option<f64>,
}

fn run(cli: Cli) -> Result<Vec<String>, CliError> {
    let file = FileConfig::load(cli.config.as_deref())?;
    let out = pick(cli.out, file.out.clone(), PathBuf::from("."));
    let label = cli.label.clone().or_else(|| file.label.clone());
    let no_timestamp = cli.no_timestamp || file.no_timestamp.unwrap_or(false);
    let output =
        OutputOpts { out: &out, label: label.as_deref(), no_timestamp };

    match cli.command {
        Command::Examples { what: ExamplesCmd::List } => Ok(commands::examples_list()),
        Command::Simulate(a) => {
            let cfg = config::SimulateConfig {
                gfn: pick_required(a.gfn, file.gfn, "gfn")?,
                init: pick_required(a.init, file.init, "init")?,
                steps: pick(a.steps, file.steps, 1000),
                seed: pick(a.seed, file.seed, 0),
            };
            commands::simulate(&cfg, &output)
        }
        Command::Hellinger(a) => {
            let cfg = config::HellingerConfig {
                gfn: pick_required(a.gfn, file.gfn, "gfn")?,
                init_a: pick_required(a.init_a, file.init_a, "init-a")?,
                init_b: pick_required(a.init_b, file.init_b, "init-b")?,
                paths: pick(a.paths, file.paths, 32),
                steps: pick(a.steps, file.steps, 1000),
                seed: pick(a.seed, file.seed, 0),
                tol: pick(a.tol, file.tol, DEFAULT_TOL),
            };
            commands::hellinger(&cfg, &output)
        }
        Command::Svar(a) => {
            let cfg = config::SvarConfig {
                gfn: pick_required(a.gfn, file.gfn, "gfn")?,
                n_max: pick(a.n_max, file.n_max, 10_000),
                points: pick(a.points, file.points, 256),
            };
            commands::svar(&cfg, &output)
        }
        Command::Transfer(a) => {
            let gfn = pick_required(a.gfn, file.gfn, "gfn")?;
            let truncation = match a.truncation.or(file.truncation) {
                Some(m) => m,
                None => default_truncation(&gfn)?,
            };
            let cfg = config::TransferConfig {
                gfn,
                depth: pick(a.depth, file.depth, 1),
                truncation,
                starts: pick(a.starts, file.starts, 10),
                tol: pick(a.tol, file.tol, 1e-10),
                seed: pick(a.seed, file.seed, 0),
            };
            commands::transfer(&cfg, &output)
        }
        Command::Escape(a) => {
            let cfg = config::EscapeConfig {
                gfn: pick_required(a.gfn, file.gfn, "gfn")?,
                init: pick_required(a.init, file.init, "init")?,
                steps: pick(a.steps, file.steps, 512),
                paths: pick(a.paths, file.paths, 64),
                window: pick(a.window, file.window, 5),
                seed: pick(a.seed, file.seed, 0),
            };
            commands::escape(&cfg, &output)
        }
        Command::Envelope(a) => {
            let base = pick(a.base, file.base, "const:0".to_string());
            let cfg = config::EnvelopeConfig {
                gfn: pick_required(a.gfn, file.gfn, "gfn")?,
                source: EnvelopeSource::parse(&pick(
                    a.source,
                    file.source,
                    "builtin".to_string(),
                ))?,
                target: pick(a.target, file.target, base.clone()),
                base,
                contexts: pick(a.contexts, file.contexts, 1000),
                seed: pick(a.seed, file.seed, 0),
                tol: pick(a.tol, file.tol, DEFAULT_TOL),
                proposals: pick(a.proposals, file.proposals, 0),
            };
            commands::envelope(&cfg, &output)
        }
        Command::Check(a) => {
            let cfg = config::CheckConfig {
                gfn: pick_required(a.gfn, file.gfn, "gfn")?,
                contexts: pick(a.contexts, file.contexts, 200),
                seed: pick(a.seed, file.seed, 0),
                tol: pick(a.tol, file.tol, DEFAULT_TOL),
            };
            commands::check(&cfg, &output)
        }
    }
}

/// The whole alphabet, for kernels whose alphabet is finite; countable
/// alphabets need an explicit `--truncation`.
fn default_truncation(gfn: &str) -> Result<usize, CliError> {
    let g = gmlab_core::gfunctions::registry::parse_gfn(gfn).map_err(CliError::Config)?;
    g.alphabet().size().ok_or_else(|| {
        CliError::Config(format!("{gfn} has a countable alphabet; pass --truncation"))
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(lines) => {
            // Stop quietly if the reader went away (e.g. piped into `head`).
            let mut out = io::stdout();
            for line in lines {
                if writeln!(out, "{line}").is_err() {
                    break;
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("gmlab: error[{}] {e}", e.kind());
            ExitCode::from(e.exit_code())
        }
    }
}
