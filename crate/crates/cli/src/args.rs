use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use structag::corpus::SentenceBoundary;
use structag::splitter::Strategy;

#[derive(Debug, Parser)]
#[command(name = "structag", version, about = "Structured-tag word clustering")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a corpus sampled from the Elman grammar, one sentence per line.
    GenerateElman(GenerateArgs),
    /// Cluster the most frequent words of a corpus into structured tags.
    Cluster(ClusterArgs),
    /// Score a tag table against a gold grouping.
    Evaluate(EvaluateArgs),
    /// Time the clustering methods over several vocabulary sizes.
    Bench(BenchArgs),
    /// Write the built-in Elman gold grouping as TSV.
    ExportGold(ExportGoldArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    M,
    Znr,
    Znrp,
}

impl From<Method> for Strategy {
    fn from(m: Method) -> Self {
        match m {
            Method::M => Strategy::M,
            Method::Znr => Strategy::Znr,
            Method::Znrp => Strategy::Znrp,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Boundary {
    #[default]
    None,
    Token,
}

impl From<Boundary> for SentenceBoundary {
    fn from(b: Boundary) -> Self {
        match b {
            Boundary::None => SentenceBoundary::None,
            Boundary::Token => SentenceBoundary::BoundaryToken,
        }
    }
}

#[derive(Clone, Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub sentences: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Corpus reading options shared by `cluster` and `bench`.
#[derive(Clone, Debug, Args)]
pub struct CorpusArgs {
    /// Input text files; a boundary is always placed between files.
    #[arg(long = "in", required = true, num_args = 1..)]
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub lowercase: bool,
    /// Keep punctuation attached to words instead of splitting it off.
    #[arg(long)]
    pub no_punctuation_tokens: bool,
    /// `token` stops bigrams at line breaks.
    #[arg(long, value_enum, default_value_t = Boundary::None)]
    pub boundary: Boundary,
}

#[derive(Clone, Debug, Args)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// Number of most frequent tokens kept as individual words.
    #[arg(long, default_value_t = 1000)]
    pub top_words: usize,
    /// Read --top-words as the total vocabulary size, pseudo-words included.
    #[arg(long)]
    pub total_vocab: bool,
    #[arg(long, default_value_t = 10)]
    pub levels: u32,
    #[arg(long, value_enum, default_value_t = Method::Znrp)]
    pub method: Method,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = structag::objective::EPSILON)]
    pub epsilon: f64,
    #[arg(long)]
    pub max_iterations: Option<usize>,
    /// TSV of `surface<TAB>bit_string` rows fixing those words' tags.
    #[arg(long)]
    pub pin: Option<PathBuf>,
    /// Score candidate moves on all cores.
    #[arg(long)]
    pub parallel: bool,
    #[arg(long)]
    pub tags: PathBuf,
    #[arg(long)]
    pub stats: PathBuf,
    /// Optional vocabulary TSV.
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    /// Optional per-iteration objective trace CSV (recomputed from scratch).
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Clone, Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub tags: PathBuf,
    /// `builtin-elman` or a TSV with columns word, group, pos.
    #[arg(long, default_value = "builtin-elman")]
    pub gold: String,
    #[arg(long, default_value_t = structag::elman::PURITY_THRESHOLD)]
    pub threshold: f64,
    /// Also write the report as a one-row CSV.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Clone, Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[arg(long, value_delimiter = ',', required = true)]
    pub top_words: Vec<usize>,
    /// Read --top-words as total vocabulary sizes, pseudo-words included.
    #[arg(long)]
    pub total_vocab: bool,
    #[arg(long, default_value_t = 10)]
    pub levels: u32,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Method::Znrp, Method::Znr, Method::M])]
    pub methods: Vec<Method>,
    /// Seeded runs of method M per vocabulary size; fastest and slowest are kept.
    #[arg(long, default_value_t = 5)]
    pub repeats: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Debug, Args)]
pub struct ExportGoldArgs {
    #[arg(long)]
    pub out: PathBuf,
}
