use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use wikistream::analysis::{DEFAULT_LAMBDA, DEFAULT_STEP, DEFAULT_THRESHOLD};
use wikistream::eval::DEFAULT_WINDOW;
use wikistream::fabricate::GapFill;
use wikistream::learn::ClassifierKind;
use wikistream::Target;

/// Wiki contributor stream mining: analysis, synthetic balancing, profiling
/// and prequential evaluation of online classifiers.
///
/// Any command accepts `--config FILE` holding `key = value` lines named like
/// the long flags; flags given on the command line win.
#[derive(Debug, Parser)]
#[command(name = "wikistream", version, args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Correlate every feature with a target (report.csv, report.json).
    Analyze(AnalyzeArgs),
    /// Recursive feature elimination over an L1 linear model.
    Select(SelectArgs),
    /// Fabricate synthetic bot aggregates and compare their statistics.
    Synthesize(SynthesizeArgs),
    /// Add synthetic bots until bots and humans match.
    Balance(BalanceArgs),
    /// Build contributor profiles from a stream.
    Profile(ProfileArgs),
    /// Prequential evaluation over a classifier x feature-set grid.
    Evaluate(EvaluateArgs),
    /// Write a simulated labelled event stream.
    Simulate(SimulateArgs),
    /// Render results tables from evaluate reports.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Rule {
    WholeQuartiles,
    Exact,
}

impl From<Rule> for GapFill {
    fn from(r: Rule) -> Self {
        match r {
            Rule::WholeQuartiles => GapFill::WholeQuartiles,
            Rule::Exact => GapFill::Exact,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EventFormat {
    Csv,
    Jsonl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableFormat {
    Table,
    Csv,
}

#[derive(Debug, Args)]
pub struct Input {
    /// Events (.csv or .jsonl) or day-level aggregates (.csv with a `day` column).
    #[arg(long, short)]
    pub input: PathBuf,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub input: Input,
    /// `user` (human/bot) or `contribution` (benign/malign).
    #[arg(long, default_value = "user")]
    pub target: Target,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    pub threshold: f64,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    #[command(flatten)]
    pub input: Input,
    #[arg(long, default_value = "user")]
    pub target: Target,
    /// Starting feature set: set1, set2, or a comma list of feature ids.
    #[arg(long, default_value = "set2")]
    pub features: String,
    /// Features to keep; defaults to the size of the matching set3 preset.
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_STEP)]
    pub step: f64,
    #[arg(long, default_value_t = DEFAULT_LAMBDA)]
    pub lambda: f64,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthesizeArgs {
    #[command(flatten)]
    pub input: Input,
    /// Samples to generate; defaults to the human/bot contributor gap.
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "whole-quartiles")]
    pub rule: Rule,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BalanceArgs {
    #[command(flatten)]
    pub input: Input,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "whole-quartiles")]
    pub rule: Rule,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    #[command(flatten)]
    pub input: Input,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub input: Input,
    /// Comma list of nb, dt, rf, bc, stacking.
    #[arg(long, default_value = "rf", value_delimiter = ',')]
    pub classifier: Vec<ClassifierKind>,
    /// Comma list of set1, set2, set3. A custom set is a `+`-joined id list.
    #[arg(long, default_value = "set3", value_delimiter = ',')]
    pub features: Vec<String>,
    #[arg(long, default_value = "user")]
    pub target: Target,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Balance the stream with synthetic bots before evaluating.
    #[arg(long)]
    pub balance: bool,
    #[arg(long, value_enum, default_value = "whole-quartiles")]
    pub rule: Rule,
    /// Size of the sliding window for the metric series.
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    pub window: usize,
    /// Worker threads for the grid; defaults to the available cores.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Feed only level-1 probabilities to the stacking meta level.
    #[arg(long)]
    pub no_level2_raw: bool,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// TOML simulation settings; missing keys take defaults.
    #[arg(long)]
    pub sim: Option<PathBuf>,
    /// Overrides the seed in the settings file.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: EventFormat,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// One or more report.json files written by `evaluate`.
    #[arg(long, short, required = true)]
    pub input: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "table")]
    pub format: TableFormat,
}
