use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hyperrank::correlation::RboVariant;
use hyperrank::eval::Protocol;
use hyperrank::qpp::Aggregation;

/// Unsupervised selection and fusion of rankers.
#[derive(Debug, Parser)]
#[command(name = "hyperrank", version)]
pub struct Cli {
    /// `key = value` config file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

/// Overrides for config keys. Commands ignore keys they do not use.
#[derive(Debug, Clone, Default, Args)]
pub struct Knobs {
    /// Collection file: one id per line, optional class and camera columns.
    #[arg(long)]
    pub collection: Option<PathBuf>,
    /// Ranked-list files; the file stem is the ranker id.
    #[arg(long, num_args = 1..)]
    pub rankers: Vec<PathBuf>,
    /// Binary distance matrices, ranked on load.
    #[arg(long, num_args = 1..)]
    pub distances: Vec<PathBuf>,
    /// Neighborhood size.
    #[arg(short, long)]
    pub k: Option<usize>,
    /// RBO persistence.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Exponent of the correlation term in pair weights.
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    /// List depth (`rank`) or fusion depth L (elsewhere).
    #[arg(long, alias = "L")]
    pub depth: Option<usize>,
    /// Total hypergraph passes during fusion.
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Number of best pairs used to build larger combinations.
    #[arg(long)]
    pub top_pairs: Option<usize>,
    /// Combination sizes to select.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    /// Output directory.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Per-query to per-ranker aggregation: mean or median.
    #[arg(long)]
    pub aggregation: Option<Aggregation>,
    /// RBO reading: prefix or fixed-k.
    #[arg(long)]
    pub rbo: Option<RboVariant>,
    /// Evaluation protocol: all or same-camera.
    #[arg(long)]
    pub protocol: Option<Protocol>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Turn distance matrices into ranked-list files.
    Rank(Knobs),
    /// Predict ranker effectiveness from hyperedge weights.
    Estimate {
        #[command(flatten)]
        knobs: Knobs,
        /// Also write per-query scores.
        #[arg(long)]
        per_query: bool,
    },
    /// Rank-biased overlap between every pair of rankers.
    Correlate(Knobs),
    /// Score pairs and select combinations of each size.
    Select(Knobs),
    /// Fuse rankers into one ranked list per query.
    Fuse {
        #[command(flatten)]
        knobs: Knobs,
        /// Selection CSV to take members from instead of all rankers.
        #[arg(long)]
        selection: Option<PathBuf>,
        /// 1-based row of the selection CSV.
        #[arg(long, default_value_t = 1)]
        row: usize,
    },
    /// Estimate, correlate, select and fuse in one go.
    Run(Knobs),
    /// MAP and CMC of ranked lists against collection labels.
    Eval(Knobs),
    /// Write a synthetic labeled collection and rankers.
    Synth {
        #[command(flatten)]
        knobs: Knobs,
        #[arg(long, value_enum, default_value_t = SynthKind::Graded)]
        kind: SynthKind,
        #[arg(long, default_value_t = 20)]
        classes: usize,
        #[arg(long, default_value_t = 15)]
        items_per_class: usize,
        /// Per-ranker noise levels for graded rankers.
        #[arg(long, value_delimiter = ',', default_value = "0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9")]
        noise: Vec<f64>,
    },
    /// CSV series for k sensitivity, predicted vs measured MAP, and top pairs.
    Report {
        #[command(flatten)]
        knobs: Knobs,
        #[arg(long, value_delimiter = ',', default_value = "10,15,20,25,30")]
        k_values: Vec<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SynthKind {
    Graded,
    Complementary,
}
