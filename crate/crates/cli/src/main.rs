//! `gazescore`: command-line front end for the reading-proficiency pipeline.

mod commands;
mod config;
mod error;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::Overrides;
use error::{CliError, CliResult};

#[derive(Parser)]
#[command(name = "gazescore", version, about = "Gaze-based reading proficiency scoring")]
struct Cli {
    /// Worker threads for per-participant work.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Repeat for more log output.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load and check tokens, fixations and scores; print a summary.
    IngestValidate(Overrides),
    /// Train a trigram language model on a text file.
    LmTrain(Overrides),
    /// Fill log frequency and surprisal columns of a tokens file.
    AnnotateSurprisal(Overrides),
    /// Extract one feature set for every participant.
    Features(Overrides),
    /// Score learners against the native prototype.
    Eyescore(Overrides),
    /// Predict test scores with ridge regression.
    Predict(Overrides),
    /// Generate a synthetic dataset with known reader parameters.
    Simulate(SimulateArgs),
    /// Held-out evaluation with baselines and split-half consistency.
    Evaluate(Overrides),
    /// Summarize a report file and plot it as SVG.
    Report(ReportArgs),
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: Overrides,
    #[arg(long)]
    n_esl: Option<usize>,
    #[arg(long)]
    n_native: Option<usize>,
    #[arg(long)]
    sentences: Option<usize>,
    #[arg(long)]
    words_per_sentence: Option<usize>,
}

#[derive(Args)]
struct ReportArgs {
    /// A JSON report written by eyescore, predict or evaluate.
    input: PathBuf,
    /// Defaults to the input path with an `.svg` extension.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn run(cli: Cli) -> CliResult<()> {
    if cli.threads == 0 {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot start thread pool: {e}")))?;
    match cli.command {
        Command::IngestValidate(o) => commands::ingest_validate(&o.resolve()?),
        Command::LmTrain(o) => commands::lm_train(&o.resolve()?),
        Command::AnnotateSurprisal(o) => commands::annotate_surprisal(&o.resolve()?),
        Command::Features(o) => commands::features(&o.resolve()?),
        Command::Eyescore(o) => commands::eyescore(&o.resolve()?),
        Command::Predict(o) => commands::predict(&o.resolve()?),
        Command::Evaluate(o) => commands::evaluate(&o.resolve()?),
        Command::Simulate(a) => {
            let mut c = a.common.resolve()?;
            let sim = &mut c.simulation;
            if let Some(v) = a.n_esl {
                sim.cohort.n_esl = v;
            }
            if let Some(v) = a.n_native {
                sim.cohort.n_native = v;
            }
            if let Some(v) = a.sentences {
                sim.sentences = v;
            }
            if let Some(v) = a.words_per_sentence {
                sim.words_per_sentence = v;
            }
            commands::simulate(&c)
        }
        Command::Report(a) => commands::report(&a.input, a.output.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
