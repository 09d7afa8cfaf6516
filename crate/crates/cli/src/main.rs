//! `coopbasin` command-line tool.
//!
//! Exit codes: 0 success, 2 input error, 3 infeasible design, 4 estimation
//! failure, 5 IO error. Every command finishes all computation before it
//! creates any output file.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod error;
mod manifest;
mod svg;

use error::CliError;

#[derive(Parser)]
#[command(name = "coopbasin", version, about = "Basins of attraction, treatment design, simulation and estimation for N-player repeated dilemmas")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Static,
    FixedTypes,
    Adaptive,
}

#[derive(Args)]
pub struct OutDir {
    /// Output directory.
    #[arg(short = 'o', long = "out", env = "COOPBASIN_OUT", default_value = "coopbasin-out")]
    pub dir: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Basin sizes, SPE and risk-dominance flags for a treatment config.
    Basin {
        config: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Solve for the cost x or the group size N that hits a basin target.
    Design(DesignArgs),
    /// Run one seeded session and summarize it.
    Simulate(SimulateArgs),
    /// Fit the piecewise basin probit to an observation CSV.
    Fit(FitArgs),
    /// Predicted cooperation from a fit, with a curve CSV and SVG.
    Predict(PredictArgs),
    /// Two-dummy decomposition over a 2x2 basin design.
    Decompose(DecomposeArgs),
    /// Basin report plus a simulated session's statistics in one document.
    Report(SimulateArgs),
}

#[derive(Args)]
pub struct DesignArgs {
    /// Target independent basin, e.g. `1/3`, `0.69` or `3^(-1/3)`.
    #[arg(long, allow_hyphen_values = true)]
    pub target: String,
    #[arg(long)]
    pub delta: String,
    /// Solve for the cost at this group size.
    #[arg(long, conflicts_with = "cost", required_unless_present = "cost")]
    pub players: Option<u32>,
    /// Solve for the group size at this relative cost.
    #[arg(long)]
    pub cost: Option<String>,
    /// Baseline payoff used for the emitted treatment config.
    #[arg(long, default_value = "11")]
    pub pi0: String,
    /// Payoff premium used for the emitted treatment config.
    #[arg(long, default_value = "9")]
    pub delta_pi: String,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Also write design.json and, for exact solutions, treatment.toml here.
    #[arg(short = 'o', long = "out")]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct SimulateArgs {
    /// TOML config with `[treatment]` and usually `[session]`.
    pub config: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Reuse the supergame lengths recorded in another run's session.json.
    #[arg(long)]
    pub schedule_from: Option<PathBuf>,
    /// Metric window, e.g. `16-20`.
    #[arg(long)]
    pub window: Option<String>,
    /// Used when the config has no `[session]` table.
    #[arg(long)]
    pub subjects: Option<u32>,
    #[arg(long)]
    pub grim_probability: Option<f64>,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    #[arg(long)]
    pub supergames: Option<u32>,
    #[command(flatten)]
    pub out: OutDir,
}

#[derive(Args)]
pub struct FitArgs {
    /// CSV with columns cooperated, p_star, cluster_id[, weight].
    pub data: PathBuf,
    /// Do not multiply the cluster sandwich by G/(G-1).
    #[arg(long)]
    pub no_small_sample_correction: bool,
    #[command(flatten)]
    pub out: OutDir,
}

#[derive(Args)]
pub struct PredictArgs {
    /// fit.json written by `coopbasin fit`.
    pub fit: PathBuf,
    /// Comma-separated basin sizes; defaults to 1/27, 1/3 and 3^(-1/3).
    #[arg(long)]
    pub at: Option<String>,
    /// Grid points for the curve.
    #[arg(long, default_value_t = 100)]
    pub points: usize,
    #[command(flatten)]
    pub out: OutDir,
}

#[derive(Args)]
pub struct DecomposeArgs {
    /// Cell CSV (cooperated, corr_decrease, ind_increase, cluster_id[, weight]) for round-1 decisions.
    #[arg(long)]
    pub initial: PathBuf,
    /// Cell CSV for later-round decisions.
    #[arg(long)]
    pub ongoing: Option<PathBuf>,
    /// Header basins `p0,ind,corr`; defaults to the reference 2x2 design.
    #[arg(long)]
    pub header: Option<String>,
    #[command(flatten)]
    pub out: OutDir,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Basin { config, format } => commands::basin(&config, format),
        Command::Design(args) => commands::design(&args),
        Command::Simulate(args) => commands::simulate(&args),
        Command::Fit(args) => commands::fit(&args),
        Command::Predict(args) => commands::predict(&args),
        Command::Decompose(args) => commands::decompose(&args),
        Command::Report(args) => commands::report(&args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
