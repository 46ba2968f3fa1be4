//! `popscore` command-line runner.

mod commands;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "popscore",
    version,
    about = "Weighted popularity scores for repository event streams"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate a dataset and write it back in canonical order with a manifest.
    Ingest(IngestArgs),
    /// Download repositories from the REST API into a dataset file.
    Fetch(FetchArgs),
    /// Per-interval and overall scores.
    Score(ScoreArgs),
    /// Competition ranking by one indicator.
    Rank(RankArgs),
    /// Correlate the overall score with repository properties.
    Correlate(DataArgs),
    /// Regress forks, stars and watchers on the score at several interval lengths.
    Sweep(SweepArgs),
    /// Label fork and star trajectories as growing, stagnant or declining.
    Classify(ClassifyArgs),
    /// Export the repository-follower graph as an edge list.
    GraphBuild(GraphBuildArgs),
    /// Remove repositories by popularity and track the clustering coefficient.
    GraphDeletion(GraphDeletionArgs),
    /// Five-number summaries of scores and repository properties.
    Summarize(DataArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DataArgs {
    /// Dataset file (JSON lines).
    #[arg(long)]
    pub input: PathBuf,
    /// Output file; a `.meta.json` sidecar is written next to it.
    #[arg(long)]
    pub output: PathBuf,
    /// Interval width in days.
    #[arg(long, default_value_t = 30, value_parser = clap::value_parser!(u32).range(1..))]
    pub interval_days: u32,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct IngestArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub data: DataArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FetchArgs {
    /// Repository as `owner/name`; repeat for several.
    #[arg(long = "repo", required = true)]
    pub repos: Vec<String>,
    /// Dataset file to write; the manifest goes next to it.
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value = "https://api.github.com")]
    pub base_url: String,
    #[arg(long, default_value_t = 100)]
    pub page_size: u32,
    #[arg(long, default_value_t = 5000)]
    pub requests_per_hour: u32,
    #[arg(long, default_value_t = 3)]
    pub retry_limit: u32,
    /// Skip the owner-followers listing.
    #[arg(long)]
    pub no_followers: bool,
    /// Keep repositories whose listings were cut short by the API.
    #[arg(long)]
    pub allow_truncated: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ScoreArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub data: DataArgs,
    /// Use weight 1 for every interval (score = forks + stars).
    #[arg(long)]
    pub weights_one: bool,
    /// Also write the interval weights to this CSV file.
    #[arg(long)]
    pub weights_output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum IndicatorArg {
    Forks,
    Stars,
    Watchers,
    Wtps,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RankArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum, default_value_t = IndicatorArg::Wtps)]
    pub indicator: IndicatorArg,
    /// Rank WTPS with unit weights.
    #[arg(long)]
    pub weights_one: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SweepArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// Interval widths in days.
    #[arg(long, value_delimiter = ',', default_value = "30,21,14,7", value_parser = clap::value_parser!(u32).range(1..))]
    pub intervals: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SeriesArg {
    Forks,
    Stars,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ClassifyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub data: DataArgs,
    /// Series to classify; both when omitted.
    #[arg(long, value_enum)]
    pub indicator: Option<SeriesArg>,
    /// Total absolute activity below which a series is stagnant.
    #[arg(long, default_value_t = 10)]
    pub min_activity: u64,
    /// Drop from peak, as a fraction of the peak, that counts as a loss.
    #[arg(long, default_value_t = 0.2)]
    pub loss_fraction: f64,
    /// Share of active intervals with gains needed for sustained growth.
    #[arg(long, default_value_t = 0.6)]
    pub growth_fraction: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SampleArgs {
    /// Keep a uniform sample of this many repositories.
    #[arg(long)]
    pub sample: Option<usize>,
    /// Seed for sampling.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GraphBuildArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub sample: SampleArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientArg {
    GlobalTransitivity,
    AverageLocal,
    BipartiteLatapy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasureArg {
    Wtps,
    Stars,
    Forks,
    Watchers,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GraphDeletionArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub sample: SampleArgs,
    #[arg(long, value_enum, default_value_t = CoefficientArg::BipartiteLatapy)]
    pub coefficient: CoefficientArg,
    /// Removal order; repeat for several. All four when omitted.
    #[arg(long = "measure", value_enum)]
    pub measures: Vec<MeasureArg>,
    /// Number of removals; defaults to min(100, repositories).
    #[arg(long)]
    pub steps: Option<usize>,
    /// Also write the series as JSON for plotting.
    #[arg(long)]
    pub series_json: Option<PathBuf>,
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Ingest(a) => commands::ingest(a),
        Command::Fetch(a) => commands::fetch(a),
        Command::Score(a) => commands::score(a),
        Command::Rank(a) => commands::rank(a),
        Command::Correlate(a) => commands::correlate(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Classify(a) => commands::classify(a),
        Command::GraphBuild(a) => commands::graph_build(a),
        Command::GraphDeletion(a) => commands::graph_deletion(a),
        Command::Summarize(a) => commands::summarize(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let err = CliError::config(e.to_string().trim_end());
            eprintln!("{}", err.to_json_line());
            return ExitCode::from(err.kind.exit_code());
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{}", err.to_json_line());
            ExitCode::from(err.kind.exit_code())
        }
    }
}
