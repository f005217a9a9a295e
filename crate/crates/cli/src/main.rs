//! `causallp`: causal link prediction pipeline front door.
//!
//! Subcommands: ingest, build, split, train, eval, query, synth, grid.
//! Exit codes: 0 success, 1 input error, 2 I/O failure, 3 leakage/validation
//! failure, 4 query error.

mod commands;
mod config;
mod errors;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::TrainOverrides;
use errors::CliError;

#[derive(Parser)]
#[command(
    name = "causallp",
    version,
    about = "Causal knowledge graphs, weighted link-prediction embeddings, and leakage-aware splits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse CEG annotation files and run the preprocessing pipeline.
    Ingest {
        /// Canonical-schema CEG file (JSONL or JSON array).
        #[arg(long)]
        input: PathBuf,
        /// Output directory for cegs.jsonl, report.tsv, manifest.tsv.
        #[arg(long)]
        out_dir: PathBuf,
        /// Treat the input as an upstream native export and adapt it first.
        #[arg(long)]
        native: bool,
    },
    /// Build a causal knowledge graph from preprocessed CEGs.
    Build {
        /// Directory produced by `ingest` (reads cegs.jsonl).
        #[arg(long)]
        in_dir: PathBuf,
        /// Subgraph view: C, CT, or CTP.
        #[arg(long, default_value = "CTP")]
        view: String,
        /// Output quad file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Produce a train/valid/test split and audit it for leakage.
    Split {
        /// Quad file to split (random strategy).
        #[arg(long)]
        kg: Option<PathBuf>,
        /// Ingest output directory or CEG file (markov strategy).
        #[arg(long)]
        ceg_dir: Option<PathBuf>,
        /// random or markov.
        #[arg(long)]
        strategy: String,
        /// prediction or explanation (markov strategy).
        #[arg(long)]
        task: Option<String>,
        /// Train,valid,test ratios for the random strategy.
        #[arg(long, default_value = "0.8,0.1,0.1")]
        ratios: String,
        /// CEG-level train-pool ratio for the markov strategy.
        #[arg(long, default_value = "0.8")]
        ceg_ratio: f64,
        /// Subgraph view projected onto the trainable quads.
        #[arg(long)]
        view: Option<String>,
        #[arg(long, default_value = "42")]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Train an embedding over a split.
    Train {
        #[arg(long)]
        split_dir: PathBuf,
        /// TransE, DistMult, ComplEx, or HolE.
        #[arg(long)]
        model: String,
        /// base (ignore weights) or weighted (modulate scores).
        #[arg(long, default_value = "base")]
        weight_mode: String,
        /// Flat `key = value` config file; flags override file values.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output checkpoint path.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        epochs: Option<usize>,
        /// Negatives per positive.
        #[arg(long)]
        eta: Option<usize>,
        #[arg(long)]
        beta_decay_epochs: Option<usize>,
        /// Pin beta to a constant, overriding the decay schedule.
        #[arg(long)]
        beta_frozen: Option<f64>,
        #[arg(long)]
        lr: Option<f64>,
        #[arg(long)]
        batch_size: Option<usize>,
        #[arg(long)]
        l2: Option<f64>,
        #[arg(long)]
        patience: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Evaluate a checkpoint with the filtered ranking protocol.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        split_dir: PathBuf,
        /// per-relation, tail, or both.
        #[arg(long, default_value = "per-relation")]
        side_policy: String,
        /// Corrupt over all entities instead of the slot's kind.
        #[arg(long)]
        wide_domain: bool,
        /// Output report path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Rank candidate cause/effect types for one entity.
    Query {
        #[arg(long)]
        checkpoint: PathBuf,
        /// Quad file providing the type domain.
        #[arg(long)]
        kg: PathBuf,
        /// predict or explain.
        #[arg(long)]
        mode: String,
        #[arg(long)]
        entity: String,
        #[arg(long, default_value = "10")]
        top_k: usize,
    },
    /// Generate a synthetic CEG corpus with planted causal regularities.
    Synth {
        #[arg(long, default_value = "200")]
        n_cegs: usize,
        #[arg(long, default_value = "5")]
        nodes_min: usize,
        #[arg(long, default_value = "9")]
        nodes_max: usize,
        #[arg(long, default_value = "0.3")]
        edge_prob: f64,
        #[arg(long, default_value = "6")]
        n_types: usize,
        #[arg(long, default_value = "0.2")]
        noise: f64,
        #[arg(long, default_value = "42")]
        seed: u64,
        /// Output CEG file (canonical schema).
        #[arg(long)]
        out: PathBuf,
    },
    /// Train one checkpoint per cell of a hyperparameter grid.
    Grid {
        #[arg(long)]
        split_dir: PathBuf,
        /// Grid file: train-config keys (plus `model`) with comma lists.
        #[arg(long)]
        grid: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Ingest {
            input,
            out_dir,
            native,
        } => commands::cmd_ingest(&input, &out_dir, native),
        Command::Build { in_dir, view, out } => commands::cmd_build(&in_dir, &view, &out),
        Command::Split {
            kg,
            ceg_dir,
            strategy,
            task,
            ratios,
            ceg_ratio,
            view,
            seed,
            out_dir,
        } => commands::cmd_split(
            kg.as_deref(),
            ceg_dir.as_deref(),
            &strategy,
            task.as_deref(),
            &ratios,
            ceg_ratio,
            view.as_deref(),
            seed,
            &out_dir,
        ),
        Command::Train {
            split_dir,
            model,
            weight_mode,
            config,
            out,
            dim,
            epochs,
            eta,
            beta_decay_epochs,
            beta_frozen,
            lr,
            batch_size,
            l2,
            patience,
            seed,
        } => {
            let overrides = TrainOverrides {
                dim,
                epochs,
                eta,
                beta_decay_epochs,
                beta_frozen,
                learning_rate: lr,
                batch_size,
                l2,
                patience,
                seed,
            };
            commands::cmd_train(
                &split_dir,
                &model,
                &weight_mode,
                config.as_deref(),
                &overrides,
                &out,
            )
        }
        Command::Eval {
            checkpoint,
            split_dir,
            side_policy,
            wide_domain,
            out,
        } => commands::cmd_eval(&checkpoint, &split_dir, &side_policy, wide_domain, &out),
        Command::Query {
            checkpoint,
            kg,
            mode,
            entity,
            top_k,
        } => commands::cmd_query(&checkpoint, &kg, &mode, &entity, top_k),
        Command::Synth {
            n_cegs,
            nodes_min,
            nodes_max,
            edge_prob,
            n_types,
            noise,
            seed,
            out,
        } => commands::cmd_synth(
            n_cegs, nodes_min, nodes_max, edge_prob, n_types, noise, seed, &out,
        ),
        Command::Grid {
            split_dir,
            grid,
            out_dir,
        } => commands::cmd_grid(&split_dir, &grid, &out_dir),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
