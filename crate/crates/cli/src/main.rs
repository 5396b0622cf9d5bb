//! `cbl`: nets, simulation, regret bounds and exact information checks from
//! the command line.

mod commands;
mod config;
mod verify;

use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{ExperimentConfig, Format};
use verify::Suite;

#[derive(Debug, Parser)]
#[command(name = "cbl", version, about = "Chained regret bounds for batched Thompson sampling")]
struct Cli {
    /// Master seed; fixes every stochastic output.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file (default: standard output).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Worker threads for trial parallelism; results do not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// JSON experiment config; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Greedy epsilon-net of a point set.
    Net(NetArgs),
    /// Nested quantization chain of a point set.
    Chain(ChainArgs),
    /// Bayesian regret curve of batched Thompson sampling.
    Simulate(SimulateArgs),
    /// Regret over a grid of dimensions and horizons.
    Scaling(ScalingArgs),
    /// Regret bound calculators for given d and T.
    Bounds(BoundsArgs),
    /// Exact verification suites on finite specs.
    Verify(VerifyArgs),
}

/// Where the points come from: a JSON file or a seeded sample of the ball.
#[derive(Debug, Clone, Args)]
pub struct PointsArgs {
    /// JSON file holding an array of coordinate vectors.
    #[arg(long)]
    pub points: Option<PathBuf>,
    #[arg(long)]
    pub d: Option<usize>,
    /// Number of points drawn uniformly from the unit ball.
    #[arg(long)]
    pub n_actions: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct NetArgs {
    #[command(flatten)]
    pub points: PointsArgs,
    #[arg(long)]
    pub epsilon: f64,
}

#[derive(Debug, Clone, Args)]
pub struct ChainArgs {
    #[command(flatten)]
    pub points: PointsArgs,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Finest level (default: the first level where every cell is a singleton).
    #[arg(long)]
    pub k_max: Option<i32>,
    /// Root the chain at the origin with k0 = 0.
    #[arg(long)]
    pub unit_ball: bool,
}

#[derive(Debug, Clone, Args)]
pub struct EnvArgs {
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long, value_parser = commands::parse_prior)]
    pub prior: Option<cbl_core::env::Prior>,
    /// Finite action set of this many ball points instead of the whole ball.
    #[arg(long)]
    pub n_actions: Option<usize>,
    /// Finite bandit spec JSON; replaces the linear environment.
    #[arg(long)]
    pub spec: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub env: EnvArgs,
    #[arg(long = "T")]
    pub horizon: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Batch size.
    #[arg(long)]
    pub m: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct ScalingArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [2usize, 4, 8])]
    pub d_grid: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [250usize, 500, 1000, 2000])]
    pub t_grid: Vec<usize>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct BoundsArgs {
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long = "T")]
    pub horizon: Option<f64>,
    /// Add the closed-form lines for the whole unit ball.
    #[arg(long)]
    pub unit_ball: bool,
    /// Net scale base for the ball-convention series.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Levels summed in the envelope bounds.
    #[arg(long)]
    pub levels: Option<usize>,
    /// Estimate level entropies on this many ball points (0 skips).
    #[arg(long, default_value_t = 0)]
    pub n_actions: usize,
    /// Posterior draws per entropy estimate.
    #[arg(long, default_value_t = 20_000)]
    pub samples: usize,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub suite: Suite,
    #[arg(long, default_value_t = 100)]
    pub instances: usize,
    #[arg(long, default_value_t = 2.0)]
    pub alpha: f64,
    /// Longest rollout history, in rounds.
    #[arg(long, default_value_t = 8)]
    pub max_steps: usize,
}

/// Error carried to the exit path: class decides the exit code.
#[derive(Debug)]
pub struct CliError {
    pub kind: &'static str,
    pub message: String,
    pub internal: bool,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError { kind: "input", message: message.into(), internal: false }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        CliError { kind: "invariant_violation", message: message.into(), internal: true }
    }

    fn exit_code(&self) -> u8 {
        if self.internal {
            2
        } else {
            1
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", serde_json::json!({ "error": self.kind, "message": self.message }))
    }
}

impl From<cbl_core::Error> for CliError {
    fn from(e: cbl_core::Error) -> Self {
        CliError { kind: e.kind(), message: e.to_string(), internal: e.is_internal() }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError { kind: "io", message: e.to_string(), internal: false }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError { kind: "json", message: e.to_string(), internal: false }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError { kind: "csv", message: e.to_string(), internal: false }
    }
}

/// Settings shared by every subcommand after merging config and flags.
pub struct Context {
    pub config: ExperimentConfig,
    pub seed: u64,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
}

impl Context {
    pub fn format_or(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }

    pub fn writer(&self) -> Result<Box<dyn Write>, CliError> {
        Ok(match &self.out {
            Some(path) => Box::new(BufWriter::new(File::create(path).map_err(|e| {
                CliError::input(format!("cannot write {}: {e}", path.display()))
            })?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(CliError::input("--jobs must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::internal(format!("thread pool: {e}")))?;
    }
    let ctx = Context {
        seed: cli.seed.or(config.agent.seed).unwrap_or(0),
        format: cli.format.or(config.output.format),
        out: cli.out.clone().or_else(|| config.output.path.clone()),
        config,
    };
    log::info!("seed {} format {:?} out {:?}", ctx.seed, ctx.format, ctx.out);
    match &cli.command {
        Command::Net(args) => commands::net(&ctx, args),
        Command::Chain(args) => commands::chain(&ctx, args),
        Command::Simulate(args) => commands::simulate(&ctx, args),
        Command::Scaling(args) => commands::scaling(&ctx, args),
        Command::Bounds(args) => commands::bounds(&ctx, args),
        Command::Verify(args) => verify::run(&ctx, args),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CBL_LOG", "error"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let message = e.to_string();
            let first = message.lines().next().unwrap_or("bad arguments");
            let first = first.strip_prefix("error: ").unwrap_or(first);
            eprintln!("{}", CliError::input(first));
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::debug!("{e:?}");
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
