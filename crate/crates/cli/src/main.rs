//! `qldpc-edp`: construct codes, decode single instances, run yield sweeps and
//! the recurrence baseline.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qldpc_edp::protocol::Implementation;

#[derive(Parser, Debug)]
#[command(name = "qldpc-edp", version, about, args_override_self = true)]
pub struct Cli {
    /// Master seed; every random choice derives from it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads [default: available parallelism].
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file (code file for construct, CSV for sweep, compare and
    /// recurrence) [default: none; CSV goes to stdout].
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Flat TOML file whose keys are long flag names; flags override it
    /// [default: none].
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a bicycle code and report its regularity, rank and commutation.
    Construct(ConstructArgs),
    /// Decode one error pattern on a code file and run the protocol on it.
    Decode(DecodeArgs),
    /// Yield sweep over a p0 grid for one implementation.
    Sweep(SweepArgs),
    /// Paired A-versus-B sweep on shared codes and noise.
    Compare(CompareArgs),
    /// Recurrence baseline from a Werner pair.
    Recurrence(RecurrenceArgs),
}

#[derive(Args, Debug)]
struct ConstructArgs {
    /// Block length [default: twice the length of --alpha].
    #[arg(long)]
    n: Option<usize>,
    /// Number of residue classes n′ [default: none; required].
    #[arg(long)]
    n_prime: Option<usize>,
    /// Nonzeros per class [default: implied by --alpha].
    #[arg(long)]
    u: Option<usize>,
    /// 1-based class labels whose rows are deleted [default: none].
    #[arg(long, value_delimiter = ',')]
    delete: Vec<usize>,
    /// Explicit generating vector of length n/2 over {0,1,w,W}, e.g. "1,w,W,0,0,0"
    /// [default: sampled from --seed].
    #[arg(long)]
    alpha: Option<String>,
}

#[derive(Args, Debug)]
struct DecodeArgs {
    /// Code file as written by `construct` [default: none; required].
    #[arg(long)]
    code: Option<PathBuf>,
    /// Error pattern over {0,1,w,W}, one symbol per qubit [default: sampled].
    #[arg(long, conflicts_with = "weight")]
    error: Option<String>,
    /// Sample an error of exactly this weight from --seed instead of the channel
    /// [default: none].
    #[arg(long)]
    weight: Option<usize>,
    /// Depolarizing probability used for the prior and for sampled noise.
    #[arg(long, default_value_t = 0.05)]
    p0: f64,
    /// Belief-propagation iteration limit.
    #[arg(long, default_value_t = qldpc_edp::decoder::DEFAULT_MAX_ITERATIONS)]
    max_iterations: usize,
}

#[derive(Args, Debug, Clone)]
struct EnsembleArgs {
    /// Block length.
    #[arg(long, default_value_t = 240)]
    n: usize,
    /// Column weight.
    #[arg(long, default_value_t = 2)]
    dv: usize,
    /// Row weight.
    #[arg(long, default_value_t = 4)]
    dc: usize,
    /// Grid of p0 values: a comma list or start:stop:step.
    #[arg(long, default_value = "0.01:0.10:0.01")]
    p0_grid: String,
    /// Trials per grid point.
    #[arg(long, default_value_t = 500)]
    trials: usize,
    /// Distinct codes per grid point.
    #[arg(long, default_value_t = qldpc_edp::harness::DEFAULT_CODES_PER_POINT)]
    codes: usize,
    /// Belief-propagation iteration limit.
    #[arg(long, default_value_t = qldpc_edp::decoder::DEFAULT_MAX_ITERATIONS)]
    max_iterations: usize,
    /// Implementation B level count [default: min(n/4, rows - 1)].
    #[arg(long)]
    max_level: Option<usize>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    ensemble: EnsembleArgs,
    /// Protocol implementation: A or B.
    #[arg(long = "impl", default_value_t = Implementation::A)]
    implementation: Implementation,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[command(flatten)]
    ensemble: EnsembleArgs,
}

#[derive(Args, Debug)]
struct RecurrenceArgs {
    /// Werner parameter of the input pairs.
    #[arg(long, default_value_t = 0.3)]
    p0: f64,
    /// Number of rounds.
    #[arg(long, default_value_t = 2)]
    rounds: usize,
    /// Pairs for a Monte Carlo check of each round; 0 skips it.
    #[arg(long, default_value_t = 0)]
    pairs: usize,
}

fn main() -> ExitCode {
    let mut args: Vec<_> = std::env::args_os().collect();
    if let Some(path) = config::config_path(&args) {
        args = match config::merge(args, path.as_ref()) {
            Ok(a) => a,
            Err(e) => {
                eprintln!("error: {e:#}");
                return ExitCode::FAILURE;
            }
        };
    }
    let cli = Cli::parse_from(args);
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
