use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dialectid::harness::{ErrorClass, HarnessError};

mod commands;

/// Arabic dialect identification toolkit.
#[derive(Debug, Parser)]
#[command(name = "dialectid", version, about)]
struct Cli {
    /// Only report warnings and errors on stderr.
    #[arg(short, long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sentence, word and character counts of a corpus.
    Stats {
        corpus: PathBuf,
        /// The file has no label column.
        #[arg(long)]
        unlabeled: bool,
        /// Print key=value lines instead of a table.
        #[arg(long)]
        kv: bool,
    },
    /// Apply surface and morphological preprocessing to a corpus.
    Preprocess {
        input: PathBuf,
        output: PathBuf,
        #[command(flatten)]
        prep: PrepArgs,
        #[arg(long)]
        unlabeled: bool,
    },
    /// Write a synthetic train/dev/test corpus.
    Synth(SynthArgs),
    /// Fit a pipeline on a labeled corpus and save it.
    Train(Box<TrainArgs>),
    /// Label documents with a saved pipeline.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        /// The input has a label column (ignored for prediction).
        #[arg(long)]
        labeled: bool,
        /// Write id<TAB>label lines here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Score a saved pipeline on a labeled corpus.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Also write the confusion matrix as TSV.
        #[arg(long)]
        confusion: Option<PathBuf>,
        #[arg(long)]
        kv: bool,
    },
    /// Run an experiment grid and print the run-by-experiment report.
    Experiment(ExperimentArgs),
    /// List the grid points of an experiment.
    Grid {
        /// exp1..exp4 for a bundled preset, or a config file path.
        experiment: String,
        #[arg(long)]
        full_grid: bool,
    },
}

#[derive(Debug, Args)]
struct PrepArgs {
    /// Comma-separated surface flags, "all" or "none".
    #[arg(long, default_value = "none")]
    surface: String,
    /// none, stem, lemma or lemma_then_stem.
    #[arg(long, default_value = "none")]
    morph: String,
    /// One stopword per line; replaces the bundled list.
    #[arg(long)]
    stoplist: Option<PathBuf>,
    /// surface<TAB>lemma lines; replaces the bundled lexicon.
    #[arg(long)]
    lexicon: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 18)]
    classes: usize,
    #[arg(long, default_value_t = 100)]
    docs_per_class: usize,
    #[arg(long, default_value_t = 40)]
    vocab_per_class: usize,
    #[arg(long, default_value_t = 200)]
    shared_vocab: usize,
    #[arg(long, default_value_t = 5)]
    min_len: usize,
    #[arg(long, default_value_t = 30)]
    max_len: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Generate the affix-signal corpus instead.
    #[arg(long)]
    affix: bool,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    prep: PrepArgs,
    /// tfidf_union, fasttext_supervised or fasttext_unsupervised.
    #[arg(long, default_value = "tfidf_union")]
    features: String,
    /// n-gram range m,n of the word analyzer.
    #[arg(long, default_value = "1,1")]
    word: String,
    #[arg(long, default_value = "1,4")]
    char: String,
    #[arg(long, default_value = "2,5")]
    char_wb: String,
    /// Per-block vocabulary cap.
    #[arg(long)]
    max_features: Option<usize>,
    /// Block weights w1,w2,w3 for word, char and char_wb.
    #[arg(long, default_value = "1,1,1")]
    weights: String,
    #[arg(long = "C", default_value_t = 100.0)]
    c: f64,
    #[arg(long, default_value_t = 1e-4)]
    tolerance: f64,
    #[arg(long, default_value_t = 1000)]
    max_sweeps: usize,
    #[arg(long, default_value_t = 50)]
    dim: usize,
    #[arg(long, default_value_t = 100)]
    epochs: usize,
    #[arg(long, default_value_t = 6)]
    window: usize,
    #[arg(long, default_value_t = 100_000)]
    buckets: usize,
    #[arg(long, default_value_t = 2)]
    minn: usize,
    #[arg(long, default_value_t = 5)]
    maxn: usize,
    #[arg(long, default_value_t = 0.05)]
    learning_rate: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    /// exp1..exp4 for a bundled preset, or a config file path.
    experiment: String,
    /// Labeled training TSV; defaults to the bundled synthetic corpus.
    #[arg(long, requires = "dev")]
    train: Option<PathBuf>,
    #[arg(long, requires = "train")]
    dev: Option<PathBuf>,
    #[arg(long, requires = "train")]
    test: Option<PathBuf>,
    /// Sweep the complete n-gram range instead of the configured one.
    #[arg(long)]
    full_grid: bool,
    #[arg(long)]
    runs: Option<usize>,
    /// Base seed; run r uses seed + r.
    #[arg(long)]
    seed: Option<u64>,
    /// Also write the report as TSV.
    #[arg(long)]
    tsv: Option<PathBuf>,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if let Some(e) = err.downcast_ref::<HarnessError>() {
        return match e.class() {
            ErrorClass::Config => 1,
            ErrorClass::Data => 2,
            ErrorClass::Internal => 3,
        };
    }
    if err.downcast_ref::<commands::UsageError>().is_some() {
        return 1;
    }
    3
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let level = if cli.quiet { "warn" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
