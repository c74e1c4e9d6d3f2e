//! `unrest`: reproducible protest-forecasting runs from the command line.
//!
//! Subcommands cover the whole pipeline: simulate a corpus, ingest and
//! cleanse it, build the feature matrix, select features, train, evaluate
//! progressively, compute baselines, transfer across events, and watch for
//! early signals. Exit code 1 means bad input, 2 an internal invariant
//! violation; errors carry a stable code prefix on stderr.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use unrest_core::error::Result;

use config::{FileConfig, Overrides, Settings};

#[derive(Parser, Debug)]
#[command(name = "unrest", version, about = "State-level protest forecasting toolkit")]
struct Cli {
    /// TOML config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed for simulation, folds, and stochastic fits.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Classifier kind: logit|nb|tree|svm.
    #[arg(long, global = true)]
    classifier: Option<String>,
    /// Feature mask, e.g. "all" or "f1,f2,f6".
    #[arg(long, global = true)]
    features: Option<String>,
    /// Cross-validation fold count.
    #[arg(long, global = true)]
    folds: Option<usize>,
    /// Output directory for artifacts.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic corpus, ground truth, and election stats.
    Simulate {
        /// Built-in generator preset: strong|event.
        #[arg(long, default_value = "strong")]
        preset: String,
        /// Full generator config as JSON (overrides the preset).
        #[arg(long)]
        gen_config: Option<PathBuf>,
        /// Number of days to simulate.
        #[arg(long)]
        days: Option<u32>,
    },
    /// Ingest and cleanse a corpus; writes cleansed.jsonl.
    Ingest {
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
    /// Build features.csv from a corpus plus ground-truth files.
    Featurize {
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        protests: Option<PathBuf>,
        #[arg(long)]
        votes: Option<PathBuf>,
        /// First matrix day (default: first corpus day).
        #[arg(long)]
        from: Option<chrono::NaiveDate>,
        /// Last matrix day (default: last corpus day).
        #[arg(long)]
        to: Option<chrono::NaiveDate>,
    },
    /// Wrapper feature selection; writes selection_report.json.
    Select {
        #[arg(long)]
        matrix: Option<PathBuf>,
    },
    /// Fit one model on the whole matrix; writes model.json.
    Train {
        #[arg(long)]
        matrix: Option<PathBuf>,
    },
    /// Progressive day-by-day evaluation; writes report.json and roc.csv.
    Evaluate {
        #[arg(long)]
        matrix: Option<PathBuf>,
        /// Ground-truth protests CSV; defaults to the matrix labels.
        #[arg(long)]
        protests: Option<PathBuf>,
    },
    /// Single-feature baselines; writes baselines.json.
    Baselines {
        #[arg(long)]
        matrix: Option<PathBuf>,
        /// Features to run alone (default f1,f2,f3).
        #[arg(long)]
        baseline_features: Option<String>,
    },
    /// Train on one matrix, evaluate on another.
    Transfer {
        #[arg(long)]
        matrix: Option<PathBuf>,
        #[arg(long)]
        test_matrix: Option<PathBuf>,
    },
    /// Scan for early signals; writes signals.csv and hashtags.csv.
    Watch {
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
    /// Progressive run emitting only roc.csv.
    Roc {
        #[arg(long)]
        matrix: Option<PathBuf>,
        #[arg(long)]
        protests: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<()> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let overrides = Overrides {
        seed: cli.seed,
        classifier: cli.classifier.clone(),
        features: cli.features.clone(),
        folds: cli.folds,
        out: cli.out.clone(),
    };
    let mut settings = Settings::resolve(file, &overrides)?;

    match cli.command {
        Command::Simulate {
            preset,
            gen_config,
            days,
        } => commands::simulate(&settings, &preset, gen_config, days),
        Command::Ingest { corpus } => {
            settings.corpus = corpus.or(settings.corpus);
            commands::ingest(&settings)
        }
        Command::Featurize {
            corpus,
            protests,
            votes,
            from,
            to,
        } => {
            settings.corpus = corpus.or(settings.corpus);
            settings.protests = protests.or(settings.protests);
            settings.votes = votes.or(settings.votes);
            settings.start_date = from.or(settings.start_date);
            settings.end_date = to.or(settings.end_date);
            commands::featurize(&settings)
        }
        Command::Select { matrix } => {
            settings.matrix = matrix.or(settings.matrix);
            commands::select(&settings)
        }
        Command::Train { matrix } => {
            settings.matrix = matrix.or(settings.matrix);
            commands::train(&settings)
        }
        Command::Evaluate { matrix, protests } => {
            settings.matrix = matrix.or(settings.matrix);
            settings.protests = protests.or(settings.protests);
            commands::evaluate(&settings)
        }
        Command::Baselines {
            matrix,
            baseline_features,
        } => {
            settings.matrix = matrix.or(settings.matrix);
            commands::baselines(&settings, baseline_features)
        }
        Command::Transfer {
            matrix,
            test_matrix,
        } => {
            settings.matrix = matrix.or(settings.matrix);
            settings.test_matrix = test_matrix.or(settings.test_matrix);
            commands::transfer(&settings)
        }
        Command::Watch { corpus } => {
            settings.corpus = corpus.or(settings.corpus);
            commands::watch(&settings)
        }
        Command::Roc { matrix, protests } => {
            settings.matrix = matrix.or(settings.matrix);
            settings.protests = protests.or(settings.protests);
            commands::roc_only(&settings)
        }
    }
}

fn main() -> ExitCode {
    // die quietly when a downstream pipe closes, like other unix tools
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("UNREST_LOG", "error")).init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            // clap renders help to stdout, errors to stderr
            let _ = err.print();
            return ExitCode::from(code);
        }
    };

    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("unrest: error[{}]: {err}", err.code());
            ExitCode::from(if err.is_internal() { 2 } else { 1 })
        }
    }
}
