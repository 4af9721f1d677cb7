use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use vsec_core::tokenizer::TokenizerMode;
use vsec_core::vi::ToneStyle;
use vsec_core::Error;

mod commands;

#[derive(Parser)]
#[command(
    name = "vsec",
    version,
    about = "Vietnamese spelling correction toolkit"
)]
struct Cli {
    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Log filter, e.g. `warn` or `debug`. RUST_LOG overrides it.
    #[arg(long, global = true, default_value = "info")]
    log: String,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Normalize raw text into space-separated syllables, one sentence per line.
    Preprocess(PreprocessArgs),
    /// Learn a subword vocabulary from a preprocessed corpus.
    TrainTokenizer(TrainTokenizerArgs),
    /// Inject synthetic errors into a preprocessed corpus.
    Corrupt(CorruptArgs),
    /// Train the correction model on a parallel dataset.
    Train(TrainArgs),
    /// Correct sentences with a trained model.
    Correct(CorrectArgs),
    /// Score corrections at the syllable level.
    Evaluate(EvaluateArgs),
}

/// Normalization options shared by every command that reads raw text.
#[derive(Args, Clone)]
struct Normalize {
    /// Keep punctuation marks as standalone tokens.
    #[arg(long)]
    keep_punct: bool,

    /// Tone mark placement in oa/oe/uy.
    #[arg(long, default_value = "new")]
    tone_style: ToneStyle,

    /// Syllable counts (`syllable<TAB>count`) used to split merged words.
    #[arg(long)]
    unigram: Option<PathBuf>,
}

#[derive(Args)]
struct PreprocessArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    norm: Normalize,
    /// Write the syllable counts used for splitting here.
    #[arg(long)]
    unigram_out: Option<PathBuf>,
}

#[derive(Args)]
struct TrainTokenizerArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Merge budget (bpe) or syllable types kept (syllable, 0 = all).
    #[arg(long, default_value_t = 2000)]
    merges: usize,
    #[arg(long, default_value = "bpe")]
    mode: TokenizerMode,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CorruptArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Fusion rules file; the built-in rules when absent.
    #[arg(long)]
    rules: Option<PathBuf>,
    /// Fraction of syllables corrupted.
    #[arg(long)]
    rate: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// TOML or JSON with `select_rate`, `seed` and `[op_weights]`.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "new")]
    tone_style: ToneStyle,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    /// Parallel dataset, JSON Lines of `{"text", "correct"}`.
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    tokenizer: PathBuf,
    /// TOML or JSON hyperparameters.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    embedding_dimension: Option<usize>,
    #[arg(long)]
    sequence_length: Option<usize>,
    #[arg(long)]
    num_heads: Option<usize>,
    #[arg(long)]
    num_layers: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    dropout_rate: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    /// Log the loss every N steps.
    #[arg(long, default_value_t = 50)]
    log_every: u64,
    #[command(flatten)]
    norm: Normalize,
}

#[derive(Args)]
struct CorrectArgs {
    #[arg(long)]
    tokenizer: PathBuf,
    #[arg(long)]
    ckpt: PathBuf,
    #[arg(
        long = "in",
        requires = "out",
        conflicts_with = "text",
        required_unless_present = "text"
    )]
    input: Option<PathBuf>,
    #[arg(long, requires = "input")]
    out: Option<PathBuf>,
    /// Correct one sentence and print it.
    #[arg(long)]
    text: Option<String>,
    #[command(flatten)]
    norm: Normalize,
}

#[derive(Args)]
struct EvaluateArgs {
    /// `{"text", "correct"}` pairs with --tokenizer/--ckpt, otherwise
    /// `{"text", "predict", "correct"}` triples.
    #[arg(long)]
    test: PathBuf,
    #[arg(long, requires = "ckpt")]
    tokenizer: Option<PathBuf>,
    #[arg(long, requires = "tokenizer")]
    ckpt: Option<PathBuf>,
    /// Also write the JSON report here.
    #[arg(long)]
    report: Option<PathBuf>,
    #[command(flatten)]
    norm: Normalize,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) => 1,
        Error::NonFinite { .. } => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    commands::init_logging(&cli.log);
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match cli.command {
        Command::Preprocess(a) => commands::preprocess(a),
        Command::TrainTokenizer(a) => commands::train_tokenizer(a),
        Command::Corrupt(a) => commands::corrupt(a),
        Command::Train(a) => commands::train(a),
        Command::Correct(a) => commands::correct(a),
        Command::Evaluate(a) => commands::evaluate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
