//! `repvec`: command-line pipeline from raw reports to classified document vectors.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "repvec", version, about = "Radiology report embedding pipeline")]
pub struct Cli {
    /// Directory for default inputs, outputs, run logs and the manifest.
    #[arg(long, global = true, env = "REPVEC_DATA_DIR", default_value = ".")]
    pub data_dir: PathBuf,

    /// Format of tabular output on stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Tsv)]
    pub format: Format,

    /// Treat stale or modified upstream artifacts as errors.
    #[arg(long, global = true)]
    pub strict: bool,

    /// Log level when RUST_LOG is unset.
    #[arg(long, global = true, default_value = "warn")]
    pub log_level: String,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Tsv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a labeled synthetic corpus and its ground truth.
    GenCorpus(GenCorpusArgs),
    /// Extract sections, clean, encode negation, prune and merge collocations.
    Condense(CondenseArgs),
    /// Compile a domain dictionary from an ontology export.
    CompileDict(CompileDictArgs),
    /// Apply the common and domain dictionaries to a condensed corpus.
    Map(MapArgs),
    /// Train word vectors.
    Train(TrainArgs),
    /// Nearest words by cosine similarity.
    Similar(SimilarArgs),
    /// Average word vectors into one vector per report.
    EmbedDocs(EmbedDocsArgs),
    /// Project document vectors to 2-D with t-SNE.
    Tsne(TsneArgs),
    /// Split labeled reports, train a classifier and score the test side.
    Classify(ClassifyArgs),
    /// Recompute metrics from a predictions file.
    Evaluate(EvaluateArgs),
    /// Cross-validated search over window size and vector dimension.
    GridSearch(GridSearchArgs),
    /// Mean raw and condensed report lengths.
    Stats(StatsArgs),
}

#[derive(Debug, Args)]
pub struct GenCorpusArgs {
    #[arg(long = "n-reports", alias = "n")]
    pub n_reports: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// No-risk, medium-risk and high-risk shares, comma separated.
    #[arg(long, value_delimiter = ',', num_args = 3)]
    pub proportions: Option<Vec<f64>>,
    #[arg(long)]
    pub synonym_swap_probability: Option<f64>,
    #[arg(long)]
    pub negation_probability: Option<f64>,
    #[arg(long)]
    pub boilerplate_count: Option<usize>,
    /// Template set (TOML); the bundled set when omitted.
    #[arg(long)]
    pub templates: Option<PathBuf>,
    /// Drop labels from the written reports.
    #[arg(long)]
    pub unlabeled: bool,
    /// Output directory for reports.jsonl and groundtruth.json.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CondenseArgs {
    /// Raw report files (JSONL), concatenated in order.
    #[arg(long = "input", num_args = 1..)]
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Condenser config (TOML or JSON).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub min_term_frequency: Option<usize>,
    #[arg(long)]
    pub collocation_min_count: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
}

#[derive(Debug, Args)]
pub struct CompileDictArgs {
    /// Ontology export (TSV); the bundled hemorrhage fragment when omitted.
    #[arg(long)]
    pub ontology: Option<PathBuf>,
    #[arg(long = "root", num_args = 1.., default_values_t = [String::from("H0001")])]
    pub roots: Vec<String>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MapArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Common dictionary (TSV); the bundled one when omitted.
    #[arg(long)]
    pub common: Option<PathBuf>,
    /// Domain dictionary (TSV); compiled from the bundled ontology when omitted.
    #[arg(long, conflicts_with = "no_domain")]
    pub domain: Option<PathBuf>,
    /// Apply the common dictionary only.
    #[arg(long)]
    pub no_domain: bool,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ArchArg {
    Cbow,
    SkipGram,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ObjectiveArg {
    Ns,
    Hs,
}

/// Flags named after the embedding training configuration fields.
#[derive(Debug, Clone, Args)]
pub struct TrainFlags {
    #[arg(long = "architecture", alias = "arch", value_enum)]
    pub architecture: Option<ArchArg>,
    #[arg(long, value_enum)]
    pub objective: Option<ObjectiveArg>,
    #[arg(long)]
    pub negatives: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub initial_learning_rate: Option<f64>,
    #[arg(long)]
    pub min_count: Option<u64>,
    #[arg(long)]
    pub subsample: Option<f64>,
    /// Training configuration (TOML or JSON); flags override its fields.
    #[arg(long = "train-config")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Model file; a `.bin` extension selects the binary format.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub flags: TrainFlags,
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
}

#[derive(Debug, Args)]
pub struct SimilarArgs {
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub word: String,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
}

#[derive(Debug, Args)]
pub struct EmbedDocsArgs {
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
}

#[derive(Debug, Args)]
pub struct TsneArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Also draw an SVG scatter plot here.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    #[arg(long)]
    pub perplexity: Option<f64>,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub initial_momentum: Option<f64>,
    #[arg(long)]
    pub final_momentum: Option<f64>,
    #[arg(long)]
    pub exaggeration_iterations: Option<usize>,
    #[arg(long)]
    pub early_exaggeration: Option<f64>,
    #[arg(long)]
    pub min_gain: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub pca_dims: Option<usize>,
    /// Project only labeled reports.
    #[arg(long)]
    pub labeled_only: bool,
    /// Keep the first N reports (after the labeled filter).
    #[arg(long)]
    pub max_points: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ClassifierArg {
    RandomForest,
    Knn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DistanceArg {
    Euclidean,
    Cosine,
}

#[derive(Debug, Clone, Args)]
pub struct ClassifierFlags {
    #[arg(long, value_enum, default_value_t = ClassifierArg::RandomForest)]
    pub classifier: ClassifierArg,
    #[arg(long, default_value_t = 100)]
    pub n_trees: usize,
    #[arg(long)]
    pub max_features: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub min_samples_leaf: usize,
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub bootstrap: bool,
    #[arg(long, default_value_t = 0)]
    pub forest_seed: u64,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long, value_enum, default_value_t = DistanceArg::Euclidean)]
    pub distance: DistanceArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FeaturesArg {
    Embedding,
    Unigram,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long, value_enum, default_value_t = FeaturesArg::Embedding)]
    pub features: FeaturesArg,
    /// Document vectors (embedding features).
    #[arg(long)]
    pub vectors: Option<PathBuf>,
    /// Condensed corpus (unigram features).
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub tfidf: bool,
    #[command(flatten)]
    pub classifier: ClassifierFlags,
    #[arg(long, default_value_t = 0.8)]
    pub train_fraction: f64,
    #[arg(long, default_value_t = 7)]
    pub split_seed: u64,
    #[arg(long)]
    pub stratified: bool,
    /// Test-side predictions (TSV).
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub metrics: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub predictions: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GridModeArg {
    Cartesian,
    Independent,
}

#[derive(Debug, Args)]
pub struct GridSearchArgs {
    /// Mapped corpus; embeddings train on every report, CV uses the labeled ones.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub windows: Vec<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub dims: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[arg(long, value_enum, default_value_t = GridModeArg::Cartesian)]
    pub mode: GridModeArg,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub classifier: ClassifierFlags,
    #[command(flatten)]
    pub train: TrainFlags,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub raw: Option<PathBuf>,
    #[arg(long)]
    pub condensed: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(&cli.log_level))
        .format_timestamp(None)
        .init();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
