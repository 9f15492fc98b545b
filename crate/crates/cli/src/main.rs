//! `veridict` command-line entry point.
//!
//! Exit codes: 0 success, 1 runtime or provider failure, 2 usage or
//! validation error.

mod commands;
mod run_manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use veridict::classifiers::ModelKind;
use veridict::corpus::CorpusFormat;
use veridict::{FeatureSet, Language, Task};

#[derive(Parser)]
#[command(name = "veridict", version, about = "Detect AI-generated and AI-rephrased text from stylometric features")]
struct Cli {
    /// More log output on stderr (repeat for debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    /// Machine-readable JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Corpus statistics and schema validation.
    Corpus {
        #[command(subcommand)]
        action: CorpusAction,
    },
    /// Write train/val/test feature matrices for one seeded split.
    Extract(ExtractArgs),
    /// Run an experiment grid and write report.csv and report.md.
    Run(RunArgs),
    /// Train a detector on one seeded split and save it.
    Train(TrainArgs),
    /// Score one text with a saved detector; prints JSON.
    Detect(DetectArgs),
}

#[derive(Args)]
struct CorpusInput {
    /// JSONL file or directory corpus.
    #[arg(long)]
    input: PathBuf,
    /// Defaults to directory for directories, jsonl otherwise.
    #[arg(long)]
    format: Option<CorpusFormat>,
}

#[derive(Subcommand)]
enum CorpusAction {
    /// Paragraph, sentence and word counts per language and label.
    Stats(CorpusInput),
    /// Check the corpus schema; exits 2 on violations.
    Validate {
        #[command(flatten)]
        input: CorpusInput,
        /// Also require every topic to be one of the ten corpus topics.
        #[arg(long)]
        paper_complete: bool,
    },
    /// Write a small synthetic corpus (JSON Lines) for smoke tests.
    Synth {
        #[arg(long)]
        out: PathBuf,
        /// Languages to include; all four when absent.
        #[arg(long, value_delimiter = ',')]
        lang: Vec<Language>,
        /// Documents per (language, label).
        #[arg(long, default_value_t = 30)]
        per_label: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct SplitArgs {
    #[command(flatten)]
    corpus: CorpusInput,
    #[arg(long)]
    lang: Language,
    #[arg(long)]
    task: Task,
    /// `all`, a category name, or a comma-separated list.
    #[arg(long, default_value = "all")]
    features: FeatureSet,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Providers JSON file; local defaults when absent.
    #[arg(long)]
    providers: Option<PathBuf>,
}

#[derive(Args)]
struct ExtractArgs {
    #[command(flatten)]
    split: SplitArgs,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    /// Grid configuration JSON.
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Corpus path; overrides the config's `corpus` entry.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Worker threads; overrides the config.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    split: SplitArgs,
    #[arg(long, default_value = "rf")]
    model: ModelKind,
    /// Hyperparameters JSON with optional `rf`, `gbdt`, `mlp` sections.
    #[arg(long)]
    hyperparameters: Option<PathBuf>,
    /// Model file to write.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DetectArgs {
    /// Detector file written by `train`.
    #[arg(long)]
    model: PathBuf,
    /// Text file; stdin when absent or `-`.
    #[arg(long)]
    text: Option<PathBuf>,
    /// Expected language; must match the detector.
    #[arg(long)]
    lang: Option<Language>,
    /// Providers JSON file; local defaults when absent.
    #[arg(long)]
    providers: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .target(env_logger::Target::Stderr)
        .init();
    let result = match cli.command {
        Command::Corpus { action } => match action {
            CorpusAction::Stats(input) => commands::corpus_stats(&input, cli.json),
            CorpusAction::Validate { input, paper_complete } => commands::corpus_validate(&input, paper_complete, cli.json),
            CorpusAction::Synth {
                out,
                lang,
                per_label,
                seed,
            } => commands::corpus_synth(&out, &lang, per_label, seed),
        },
        Command::Extract(args) => commands::extract(&args, cli.json),
        Command::Run(args) => commands::run(&args, cli.json),
        Command::Train(args) => commands::train(&args, cli.json),
        Command::Detect(args) => commands::detect(&args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
