//! `turkpos`: command-line entry points for every pipeline stage.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use turkpos::corpus;
use turkpos::hmm::{bootstrap_label, HmmModel, DEFAULT_K};
use turkpos::nn::{deserialize, gradcheck, serialize};
use turkpos::preprocess::preprocess_document;
use turkpos::tagger::{export_analysis, tag_text, ExportFormat};
use turkpos::trainer::{evaluate, train_with_progress, TrainConfig};
use turkpos::BlstmModel;
use turkpos_service::ServiceConfig;

/// Largest relative gradient error `gradcheck` accepts.
const GRADCHECK_TOLERANCE: f64 = 1e-5;

#[derive(Parser)]
#[command(
    name = "turkpos",
    version,
    about = "Turkish part-of-speech tagging with a bidirectional LSTM"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Clean raw text: one sentence per line, tokens separated by spaces.
    Preprocess {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Label raw text with a trigram HMM trained on a labeled corpus.
    BootstrapLabel {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        raw: PathBuf,
        /// Add-k smoothing constant.
        #[arg(long, default_value_t = DEFAULT_K)]
        k: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a model and write it to `--out`, printing the loss per epoch.
    Train {
        #[arg(long)]
        corpus: PathBuf,
        /// Config file; only its `[train]` table is used.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the configured seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score a model against a labeled corpus.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
        format: ReportFormat,
    },
    /// Tag text given inline or read from a file.
    Tag {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, conflicts_with = "input", required_unless_present = "input")]
        text: Option<String>,
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = TagFormat::Tsv)]
        format: TagFormat,
    },
    /// Compare analytic and finite-difference gradients on a small model.
    Gradcheck {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-5)]
        epsilon: f64,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Text,
    Structured,
}

#[derive(Clone, Copy, ValueEnum)]
enum TagFormat {
    Tsv,
    Structured,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Preprocess { input, out } => {
            let text = read_text(&input)?;
            let mut lines = String::new();
            for sentence in preprocess_document(&text) {
                lines.push_str(&sentence.tokens().join(" "));
                lines.push('\n');
            }
            write(&out, lines.as_bytes())
        }
        Command::BootstrapLabel {
            corpus: seed,
            raw,
            k,
            out,
        } => {
            let seed = corpus::load(&seed).with_context(|| format!("loading {}", seed.display()))?;
            let hmm = HmmModel::train(&seed, k)?;
            let labeled = bootstrap_label(&[read_text(&raw)?], &hmm)?;
            corpus::save(&out, &labeled).with_context(|| format!("writing {}", out.display()))?;
            println!("labeled {} sentences ({} tokens)", labeled.len(), labeled.token_count());
            Ok(())
        }
        Command::Train {
            corpus: path,
            config,
            seed,
            out,
        } => {
            let mut train = match config {
                Some(path) => ServiceConfig::from_file(&path)?.train,
                None => TrainConfig::default(),
            };
            if let Some(seed) = seed {
                train.seed = seed;
            }
            let data = corpus::load(&path).with_context(|| format!("loading {}", path.display()))?;
            let outcome = train_with_progress::<f64>(&data, &train, |epoch, loss| {
                println!("epoch {:>4}  loss {loss:.6}", epoch + 1);
            })?;
            write(&out, &serialize(&outcome.model))
        }
        Command::Eval {
            model,
            corpus: path,
            format,
        } => {
            let model = load_model(&model)?;
            let data = corpus::load(&path).with_context(|| format!("loading {}", path.display()))?;
            let report = evaluate(&model, &data)?;
            match format {
                ReportFormat::Text => print!("{report}"),
                ReportFormat::Structured => println!("{}", serde_json::to_string_pretty(&report)?),
            }
            Ok(())
        }
        Command::Tag {
            model,
            text,
            input,
            format,
        } => {
            let model = load_model(&model)?;
            let text = match (text, input) {
                (Some(t), _) => t,
                (None, Some(path)) => read_text(&path)?,
                (None, None) => bail!("either --text or --in is required"),
            };
            let doc = tag_text(&text, &model)?;
            let format = match format {
                TagFormat::Tsv => ExportFormat::Tsv,
                TagFormat::Structured => ExportFormat::Structured,
            };
            let mut bytes = export_analysis(&doc, format);
            bytes.push(b'\n');
            print!("{}", String::from_utf8(bytes)?);
            Ok(())
        }
        Command::Gradcheck { seed, epsilon } => {
            let (model, batch) = gradcheck::fixture(seed);
            let report = gradcheck::gradient_check(&model, &batch, epsilon)?;
            println!(
                "max relative error {:.3e} at {}[{}] over {} parameters",
                report.max_relative_error, report.worst.0, report.worst.1, report.parameters_checked
            );
            if report.max_relative_error >= GRADCHECK_TOLERANCE {
                bail!(
                    "gradient check failed: {:.3e} >= {GRADCHECK_TOLERANCE:e}",
                    report.max_relative_error
                );
            }
            Ok(())
        }
        Command::Serve { config } => {
            tracing_subscriber::fmt()
                .with_env_filter(
                    tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
                )
                .init();
            let config = ServiceConfig::load(&config)?;
            tokio::runtime::Runtime::new()?.block_on(turkpos_service::run(config))
        }
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn load_model(path: &Path) -> Result<BlstmModel> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    deserialize(&bytes).with_context(|| format!("loading model {}", path.display()))
}
