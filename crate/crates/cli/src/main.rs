mod commands;
mod config;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::RunConfig;

/// Emotion-cause pair extraction: synthetic corpora, training,
/// evaluation, and graph inspection, all reproducible from one seed.
#[derive(Parser)]
#[command(name = "cgr", version)]
struct Cli {
    /// TOML run configuration; built-in defaults apply when omitted.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Master seed override; wins over the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic corpus and write it as JSONL.
    Gen {
        /// Output corpus path.
        #[arg(long)]
        out: PathBuf,
        /// Document count override.
        #[arg(long)]
        docs: Option<usize>,
    },
    /// Train a model; writes model.json and history.csv to the output
    /// directory.
    Train {
        /// Corpus JSONL path; falls back to [paths] corpus.
        corpus: Option<PathBuf>,
        /// Output directory; falls back to [paths] out_dir.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Tagging window override.
        #[arg(long)]
        gamma: Option<usize>,
        /// Reasoning step count override.
        #[arg(long)]
        steps: Option<usize>,
        /// Graph variant override: full, owm, norel, or fcg.
        #[arg(long)]
        variant: Option<String>,
    },
    /// Score a checkpoint against a corpus and print the metrics as
    /// JSON.
    Eval {
        checkpoint: PathBuf,
        corpus: PathBuf,
    },
    /// Extract pairs for every document and write them as JSONL.
    Predict {
        checkpoint: PathBuf,
        corpus: PathBuf,
        /// Output predictions path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Build a relational graph and print node, edge, and per-relation
    /// counts; optionally write it in DOT form.
    Graph {
        /// Number of clauses.
        n: usize,
        /// Relation window.
        gamma: usize,
        /// Graph variant: full, owm, norel, or fcg.
        #[arg(long, default_value = "full")]
        variant: String,
        /// DOT output path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train and evaluate across one dimension (gamma, steps, variant,
    /// or loss) and write a CSV of scores.
    Sweep {
        /// Dimension to sweep.
        dimension: String,
        /// Corpus JSONL path; generated from [synth] when absent.
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// Comma-separated subset of sweep values to run.
        #[arg(long)]
        values: Option<String>,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if cli.seed.is_some() {
        config.seed = cli.seed;
    }
    config.validate()?;

    match cli.command {
        Command::Gen { out, docs } => commands::cmd_gen(&config, &out, docs),
        Command::Train { corpus, out_dir, gamma, steps, variant } => {
            let mut model = config.model.clone();
            if let Some(gamma) = gamma {
                model.gamma = gamma;
            }
            if let Some(steps) = steps {
                model.steps = steps;
            }
            if let Some(variant) = variant {
                model.graph_variant = commands::parse_variant(&variant)?;
            }
            model.validate()?;
            commands::cmd_train(&config, corpus.as_deref(), out_dir.as_deref(), &model)
        }
        Command::Eval { checkpoint, corpus } => commands::cmd_eval(&checkpoint, &corpus),
        Command::Predict { checkpoint, corpus, out } => {
            commands::cmd_predict(&checkpoint, &corpus, &out)
        }
        Command::Graph { n, gamma, variant, out } => {
            commands::cmd_graph(n, gamma, commands::parse_variant(&variant)?, out.as_deref())
        }
        Command::Sweep { dimension, corpus, values, out } => {
            commands::cmd_sweep(&config, &dimension, corpus.as_deref(), values.as_deref(), &out)
        }
    }
}
