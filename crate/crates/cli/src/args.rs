use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use hyperlit_core::corpus::DEFAULT_MEMORY;
use hyperlit_core::embedding::TrainConfig;
use hyperlit_core::predict::{Metric, DEFAULT_K};
use hyperlit_core::synth::PlantedConfig;
use hyperlit_core::walker::{Sampling, WalkConfig};

#[derive(Debug, Parser)]
#[command(
    name = "hyperlit",
    version,
    about = "Human-aware discovery prediction over publication hypergraphs",
    args_override_self = true
)]
pub struct Cli {
    /// Seed for every random choice
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Worker threads (outputs do not depend on this)
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,

    /// key=value file of default flags for the subcommand
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a planted synthetic corpus and its ground truth
    Synth(SynthArgs),
    /// Build a hypergraph snapshot from a corpus window
    Build(BuildArgs),
    /// Sample random walks from a property node
    Walk(WalkArgs),
    /// Train skip-gram vectors on walks or on corpus records
    Embed(EmbedArgs),
    /// Rank candidate materials for a property
    Predict(PredictArgs),
    /// Rank likely discoverers of a property
    Discoverers(DiscoverersArgs),
    /// Rank complementary hypotheses over a grid of β values
    Alien(AlienArgs),
    /// Score predictions against ground truth
    Eval(EvalArgs),
}

impl Command {
    pub const NAMES: [&'static str; 8] =
        ["synth", "build", "walk", "embed", "predict", "discoverers", "alien", "eval"];
}

fn sampling(s: &str) -> Result<Sampling, String> {
    s.parse().map_err(|e: hyperlit_core::Error| e.to_string())
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Output corpus (JSON lines)
    #[arg(long)]
    pub corpus: PathBuf,
    /// Output ground truth (property, material, period)
    #[arg(long)]
    pub truth: PathBuf,
    #[arg(long, default_value_t = PlantedConfig::default().communities)]
    pub communities: usize,
    #[arg(long, default_value_t = PlantedConfig::default().authors_per_community)]
    pub authors: usize,
    #[arg(long, default_value_t = PlantedConfig::default().materials_per_community)]
    pub materials: usize,
    /// Papers per community per period
    #[arg(long, default_value_t = PlantedConfig::default().papers_per_period)]
    pub papers: usize,
    #[arg(long, default_value_t = PlantedConfig::default().start_period)]
    pub start: i64,
    #[arg(long, default_value_t = PlantedConfig::default().periods)]
    pub periods: usize,
    #[arg(long, default_value_t = PlantedConfig::default().planted_pairs)]
    pub planted: usize,
    /// Reveal period per planted pair (default: all at the last period)
    #[arg(long, value_delimiter = ',')]
    pub reveal: Vec<i64>,
    #[arg(long, default_value_t = PlantedConfig::default().overlap_rate)]
    pub overlap: f64,
    #[arg(long, default_value_t = PlantedConfig::default().material_mixing)]
    pub mixing: f64,
    /// Cap on papers mentioning the target property
    #[arg(long)]
    pub property_papers: Option<usize>,
}

/// A half-open window `[end - memory, end)` of a corpus.
#[derive(Debug, Args)]
pub struct WindowArgs {
    /// First period after the window (default: after the last record)
    #[arg(long)]
    pub end: Option<i64>,
    #[arg(long, default_value_t = DEFAULT_MEMORY)]
    pub memory: i64,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[command(flatten)]
    pub span: WindowArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SamplingArgs {
    /// α, `inf`, or `uniform`
    #[arg(long, default_value = "1", value_parser = sampling)]
    pub alpha: Sampling,
    /// Let a step stay on the current node
    #[arg(long)]
    pub lazy: bool,
}

#[derive(Debug, Args)]
pub struct WalkArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub property: String,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    #[arg(long, default_value_t = WalkConfig::default().num_walks)]
    pub walks: usize,
    #[arg(long, default_value_t = WalkConfig::default().walk_length)]
    pub length: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["walks", "corpus"])))]
pub struct EmbedArgs {
    /// Walk file; authors are removed unless --keep-authors
    #[arg(long)]
    pub walks: Option<PathBuf>,
    /// Corpus whose records (materials and properties) become sentences
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[command(flatten)]
    pub span: WindowArgs,
    #[arg(long)]
    pub keep_authors: bool,
    #[arg(long, default_value_t = TrainConfig::default().dimension)]
    pub dim: usize,
    #[arg(long, default_value_t = TrainConfig::default().window)]
    pub window: usize,
    #[arg(long, default_value_t = TrainConfig::default().epochs)]
    pub epochs: usize,
    #[arg(long, default_value_t = TrainConfig::default().negatives)]
    pub negatives: usize,
    #[arg(long, default_value_t = TrainConfig::default().learning_rate)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = TrainConfig::default().min_count)]
    pub min_count: u64,
    /// Lock-free parallel training; faster, not reproducible
    #[arg(long)]
    pub parallel: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MetricArg {
    #[value(name = "deepwalk_cosine")]
    DeepwalkCosine,
    Trans2,
    Trans3,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Metric {
        match m {
            MetricArg::DeepwalkCosine => Metric::DeepwalkCosine,
            MetricArg::Trans2 => Metric::Trans2,
            MetricArg::Trans3 => Metric::Trans3,
        }
    }
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub property: String,
    #[arg(long, value_enum)]
    pub metric: MetricArg,
    /// Corpus the candidate pool is drawn from
    #[arg(long)]
    pub corpus: PathBuf,
    #[command(flatten)]
    pub span: WindowArgs,
    /// Vectors for deepwalk_cosine
    #[arg(long)]
    pub vectors: Option<PathBuf>,
    /// Graph for trans2/trans3 (default: built from the corpus window)
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    #[arg(long, default_value_t = DEFAULT_K)]
    pub k: usize,
    #[arg(long)]
    pub out: PathBuf,
}

/// Graph mode needs --graph or --corpus; material mode needs --vectors.
#[derive(Debug, Args)]
pub struct DiscoverersArgs {
    #[arg(long)]
    pub property: String,
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[command(flatten)]
    pub span: WindowArgs,
    /// Rank authors for this material by mean cosine rank (needs --vectors)
    #[arg(long, requires = "vectors")]
    pub material: Option<String>,
    #[arg(long)]
    pub vectors: Option<PathBuf>,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    #[arg(long, default_value_t = DEFAULT_K)]
    pub k: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum InfiniteSpdArg {
    Top,
    Exclude,
}

#[derive(Debug, Args)]
pub struct AlienArgs {
    #[arg(long)]
    pub property: String,
    #[arg(long)]
    pub corpus: PathBuf,
    #[command(flatten)]
    pub span: WindowArgs,
    /// Plausibility vectors
    #[arg(long)]
    pub vectors: PathBuf,
    /// Graph for distances (default: built from the corpus window)
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Explicit β values; overrides --grid
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub betas: Vec<f64>,
    /// β grid as lo:hi:step
    #[arg(long, default_value = "-0.8:0.8:0.2", allow_hyphen_values = true)]
    pub grid: String,
    #[arg(long, default_value_t = DEFAULT_K)]
    pub k: usize,
    #[arg(long, value_enum, default_value_t = InfiniteSpdArg::Top)]
    pub infinite_spd: InfiniteSpdArg,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("inputs").required(true).multiple(true).args(["predictions", "sweep", "discoverers"])))]
pub struct EvalArgs {
    #[arg(long)]
    pub truth: PathBuf,
    /// Ranked prediction files
    #[arg(long, value_delimiter = ',')]
    pub predictions: Vec<PathBuf>,
    /// β sweep from `alien`
    #[arg(long)]
    pub sweep: Option<PathBuf>,
    /// Theory scores for the plausibility transform (sweep only)
    #[arg(long, requires = "sweep")]
    pub theory: Option<PathBuf>,
    /// Ranked discoverer predictions (needs --corpus)
    #[arg(long, requires = "corpus")]
    pub discoverers: Option<PathBuf>,
    /// Corpus for discoverers and expert density
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Also correlate expert density with discovery period (needs --corpus)
    #[arg(long, requires = "corpus")]
    pub density: bool,
    /// First discovery period counted (default: the `end` recorded in each input)
    #[arg(long)]
    pub from: Option<i64>,
    #[arg(long, default_value_t = DEFAULT_MEMORY)]
    pub memory: i64,
    #[arg(long)]
    pub out: PathBuf,
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn command_is_consistent() {
        Cli::command().debug_assert();
        let names: Vec<String> = Cli::command().get_subcommands().map(|s| s.get_name().to_string()).collect();
        assert_eq!(names, Command::NAMES);
    }
}
