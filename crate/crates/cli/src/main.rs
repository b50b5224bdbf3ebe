mod commands;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use featint_core::conditions::DEFAULT_BOUND;
use featint_core::{Error, Strategy};

#[derive(Parser)]
#[command(name = "featint", version, about = "Find feature-interaction bugs in #ifdef code and rank configurations by them")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract operation facts and report suspicious selections.
    Analyze(AnalyzeArgs),
    /// Sample configurations from the option space.
    Sample(SampleArgs),
    /// Order a configuration table.
    Prioritize(PrioritizeArgs),
    /// Score a ranked table against known bugs.
    Evaluate(EvaluateArgs),
    /// analyze, sample (or load), prioritize and optionally evaluate.
    Pipeline(PipelineArgs),
    /// Check every valid variant with the brute-force oracle.
    #[command(hide = true)]
    Oracle(OracleArgs),
}

#[derive(Args, Clone)]
pub struct FrontendArgs {
    /// C sources to analyze.
    #[arg(required = true)]
    pub sources: Vec<PathBuf>,
    /// Prefix stripped from option names.
    #[arg(long, default_value = "CONFIG_")]
    pub options_prefix: String,
    /// Functions whose call destructs the argument.
    #[arg(long, value_delimiter = ',', default_value = "free")]
    pub destructors: Vec<String>,
}

#[derive(Args, Clone)]
pub struct SpaceArgs {
    /// Constraints, one per line.
    #[arg(long)]
    pub feature_model: Option<PathBuf>,
    /// Refuse to enumerate more options than this.
    #[arg(long, default_value_t = DEFAULT_BOUND)]
    pub max_options: usize,
}

#[derive(Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub frontend: FrontendArgs,
    /// Directory for facts.tsv, tables.tsv and selections.tsv. Without it the
    /// selections go to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum PlanKind {
    TWise,
    OneEnabled,
    OneDisabled,
    MostEnabledDisabled,
    StatementCoverage,
}

#[derive(Args, Clone)]
pub struct PlanArgs {
    #[arg(long, value_enum, default_value = "t-wise")]
    pub plan: PlanKind,
    /// Interaction strength for t-wise.
    #[arg(long, default_value_t = 2)]
    pub t: usize,
}

#[derive(Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub plan: PlanArgs,
    #[command(flatten)]
    pub space: SpaceArgs,
    /// Option names, in order. Taken from the sources when absent.
    #[arg(long, value_delimiter = ',')]
    pub options: Option<Vec<String>>,
    /// Sources supplying options and, for statement coverage, blocks.
    pub sources: Vec<PathBuf>,
    #[arg(long, default_value = "CONFIG_")]
    pub options_prefix: String,
    #[arg(long, value_delimiter = ',', default_value = "free")]
    pub destructors: Vec<String>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Clone)]
pub struct StrategyArgs {
    #[arg(long, default_value = "copro", value_parser = parse_strategy)]
    pub strategy: Strategy,
    /// Seed for the random strategy.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn parse_strategy(s: &str) -> Result<Strategy, String> {
    s.parse()
}

#[derive(Args)]
pub struct PrioritizeArgs {
    /// Configuration table.
    #[arg(long)]
    pub configs: PathBuf,
    /// Selections written by `analyze`.
    #[arg(long)]
    pub selections: PathBuf,
    /// Tables written by `analyze`; lets sp count an option whose code sits
    /// under its disabled value as a feature when disabled.
    #[arg(long)]
    pub tables: Option<PathBuf>,
    #[command(flatten)]
    pub strategy: StrategyArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Text,
    Kv,
}

#[derive(Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub ranked: PathBuf,
    /// Lines of `id: OPT=T, OPT=F`.
    #[arg(long)]
    pub bugs: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    pub format: ReportFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct PipelineArgs {
    #[command(flatten)]
    pub frontend: FrontendArgs,
    #[command(flatten)]
    pub space: SpaceArgs,
    #[command(flatten)]
    pub plan: PlanArgs,
    /// Prioritize this table instead of sampling.
    #[arg(long)]
    pub configs: Option<PathBuf>,
    #[command(flatten)]
    pub strategy: StrategyArgs,
    #[arg(long)]
    pub bugs: Option<PathBuf>,
    /// Directory receiving every artifact.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub frontend: FrontendArgs,
    #[command(flatten)]
    pub space: SpaceArgs,
    /// Check these configurations instead of the whole valid space.
    #[arg(long)]
    pub configs: Option<PathBuf>,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Parse { .. }) => 2,
        Some(Error::EmptySpace) => 3,
        Some(Error::OptionMismatch(_) | Error::UnknownOption(_)) => 4,
        Some(Error::NoBugs) => 5,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze(a) => commands::analyze(&a),
        Command::Sample(a) => commands::sample(&a),
        Command::Prioritize(a) => commands::prioritize(&a),
        Command::Evaluate(a) => commands::evaluate(&a),
        Command::Pipeline(a) => commands::pipeline(&a),
        Command::Oracle(a) => commands::oracle(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("featint: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
