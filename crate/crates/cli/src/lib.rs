//! Batch front end for the hopwalk pipeline.
//!
//! Stages talk through files: `ingest`/`synth` write a train graph and a
//! labeled pair file, `sample` writes a walk corpus, `train` and `concat`
//! write embedding files and `evaluate` writes the AUC report. `pipeline`
//! runs all of them from one config file and skips stages whose outputs are
//! already up to date.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub mod commands;
pub mod config;
pub mod pipeline;
pub mod stage;

pub const SEED_ENV: &str = "HOPWALK_SEED";

/// Exit code 1: the command ran and failed.
pub const EXIT_RUNTIME: i32 = 1;
/// Exit code 2: bad arguments, missing inputs or invalid parameters.
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0:#}")]
    Runtime(anyhow::Error),
}

impl CliError {
    pub fn runtime(msg: impl Into<String>) -> Self {
        CliError::Runtime(anyhow::anyhow!(msg.into()))
    }

    pub fn io(e: std::io::Error) -> Self {
        CliError::Runtime(e.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "hopwalk", version, about = "K-hop random-walk embeddings and link-prediction evaluation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Split a bibliographic record file into a train graph and labeled eval pairs.
    Ingest(IngestArgs),
    /// Generate a planted-community synthetic graph and labeled eval pairs.
    Synth(SynthArgs),
    /// Sample a K-hop random-walk corpus from a graph.
    Sample(SampleArgs),
    /// Train skip-gram embeddings on a corpus.
    Train(TrainArgs),
    /// Concatenate embedding files row-wise.
    Concat(ConcatArgs),
    /// Repeated-split AUC evaluation of one or more embeddings.
    Evaluate(EvaluateArgs),
    /// Run every stage from a config file.
    Pipeline(PipelineArgs),
}

#[derive(Debug, Args)]
pub struct SplitOutputs {
    /// Train graph edge list to write.
    #[arg(long, default_value = "graph.tsv")]
    pub graph_out: PathBuf,
    /// Labeled eval pair file to write.
    #[arg(long, default_value = "pairs.tsv")]
    pub pairs_out: PathBuf,
    /// Seed for negative pair sampling (and synthetic generation).
    #[arg(long, env = SEED_ENV)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Record file: `<paper>\t<year>\t<author>|<author>...\t<venue?>` per line.
    #[arg(long, conflicts_with = "synthetic", required_unless_present = "synthetic")]
    pub records: Option<PathBuf>,
    /// Use a generated fixture instead of a record file (`default` or `null`).
    #[arg(long)]
    pub synthetic: Option<String>,
    #[arg(long, default_value_t = 2008)]
    pub train_end: i32,
    #[arg(long, default_value_t = 2011)]
    pub eval_end: i32,
    #[command(flatten)]
    pub outputs: SplitOutputs,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 3)]
    pub communities: usize,
    #[arg(long, default_value_t = 100)]
    pub authors_per_community: usize,
    #[arg(long, default_value_t = 5)]
    pub papers_per_author: usize,
    #[arg(long, default_value_t = 5)]
    pub venues_per_community: usize,
    #[arg(long, default_value_t = 4)]
    pub max_authors_per_paper: usize,
    #[arg(long, default_value_t = 0.1)]
    pub cross_fraction: f64,
    #[arg(long, default_value_t = 0.05)]
    pub eval_fraction: f64,
    /// `planted` (intra-community) or `random` eval pairs.
    #[arg(long, default_value = "planted")]
    pub eval_mode: String,
    #[command(flatten)]
    pub outputs: SplitOutputs,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Intermediate nodes between two emitted nodes.
    #[arg(long, short = 'k', default_value_t = 1)]
    pub hop_k: usize,
    /// Walks started from every node.
    #[arg(long, default_value_t = 30)]
    pub iterations: usize,
    /// Emitted sequence length.
    #[arg(long, default_value_t = 100)]
    pub length: usize,
    #[arg(long, env = SEED_ENV)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    #[arg(long, default_value = "corpus.txt")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, default_value_t = 128)]
    pub dim: usize,
    #[arg(long, default_value_t = 5)]
    pub window: usize,
    #[arg(long, default_value_t = 5)]
    pub negatives: usize,
    #[arg(long, default_value_t = 5)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.025)]
    pub lr_start: f64,
    #[arg(long, default_value_t = 0.0001)]
    pub lr_end: f64,
    #[arg(long, default_value_t = 0.75)]
    pub ns_exponent: f64,
    #[arg(long, env = SEED_ENV)]
    pub seed: Option<u64>,
    /// More than one worker trains without synchronization and is not reproducible.
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    #[arg(long, default_value = "embedding.txt")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ConcatArgs {
    #[arg(required = true, num_args = 1..)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, default_value = "embedding_concat.txt")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// `NAME=PATH`; repeat for several methods. A bare path uses its file stem.
    #[arg(long = "embedding", short = 'e', required = true)]
    pub embeddings: Vec<String>,
    #[arg(long)]
    pub pairs: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub repeats: usize,
    #[arg(long, default_value_t = 0.8)]
    pub ratio: f64,
    #[arg(long, env = SEED_ENV)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Human-readable table.
    #[arg(long)]
    pub table_out: Option<PathBuf>,
    /// `key=value` records, one per classifier and method.
    #[arg(long)]
    pub records_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    /// Run config (TOML). Omit to run the synthetic defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = "hopwalk-run")]
    pub out_dir: PathBuf,
    /// Override a config value, e.g. `--set train.dim=64`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Recompute every stage even if its outputs are current.
    #[arg(long)]
    pub force: bool,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Overrides the config file's top-level seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Ingest(a) => commands::ingest(&a).map(|_| ()),
        Command::Synth(a) => commands::synth(&a).map(|_| ()),
        Command::Sample(a) => commands::sample(&a).map(|_| ()),
        Command::Train(a) => commands::train(&a).map(|_| ()),
        Command::Concat(a) => commands::concat(&a).map(|_| ()),
        Command::Evaluate(a) => commands::evaluate(&a).map(|_| ()),
        Command::Pipeline(a) => pipeline::run_pipeline(&a).map(|_| ()),
    }
}
