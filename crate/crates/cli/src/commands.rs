//! Implementations of the CLI subcommands.

use std::fs;
use std::path::{Path, PathBuf};

use causallp_core::builder::{
    build_corpus_kg, export_quads, import_quads, project, write_quad_list, BuildStats,
    SubgraphView,
};
use causallp_core::embed::{load_checkpoint, save_checkpoint, train, ModelKind, WeightMode};
use causallp_core::eval::{evaluate, query_explain, query_predict, write_report, EvalContext, SidePolicy};
use causallp_core::ingest::{adapter, parse_ceg_file, preprocess, write_cegs};
use causallp_core::model::{CausalNetwork, EntityKind, Quad};
use causallp_core::split::{
    leakage_audit, markov_split, random_split, split_manifest_pairs, CausalTask, Provenance,
    SplitStrategy,
};
use causallp_core::{Ceg, TrainConfig64};

use crate::config::{self, GridCell};
use crate::errors::CliError;
use crate::manifest::ManifestBuilder;

fn ensure_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path)?;
    Ok(())
}

fn parse_view(s: &str) -> Result<SubgraphView, CliError> {
    SubgraphView::parse(s).ok_or_else(|| CliError::Input(format!("unknown view {s:?}")))
}

fn preprocessed_networks(cegs: Vec<Ceg>) -> Result<Vec<CausalNetwork>, CliError> {
    let (kept, _) = preprocess(cegs);
    let mut nets = Vec::with_capacity(kept.len());
    for ceg in &kept {
        nets.push(causallp_core::builder::network_from_ceg(ceg)?);
    }
    Ok(nets)
}

/// Reads a quad file as an ordered quad list (the file's line order).
fn read_quads(path: &Path) -> Result<Vec<Quad>, CliError> {
    let kg = import_quads(path)?;
    Ok(kg.quads().collect())
}

// ---------------------------------------------------------------------------
// ingest
// ---------------------------------------------------------------------------

pub fn cmd_ingest(input: &Path, out_dir: &Path, native: bool) -> Result<(), CliError> {
    let manifest = ManifestBuilder::new("ingest");
    ensure_dir(out_dir)?;
    let cegs = if native {
        let content = fs::read_to_string(input).map_err(CliError::from)?;
        adapter::adapt_export(&content)?
    } else {
        parse_ceg_file(input)?
    };
    let (kept, report) = preprocess(cegs);
    write_cegs(&kept, out_dir.join("cegs.jsonl"))?;
    fs::write(out_dir.join("report.tsv"), report.to_string())?;

    let mut manifest = manifest;
    manifest.push_path("input", input);
    manifest.push_path("out_dir", out_dir);
    manifest.push("native", native);
    for (k, v) in report.as_pairs() {
        manifest.push(k, v);
    }
    manifest.write(&out_dir.join("manifest.tsv"))?;
    println!(
        "ingest: {} CEGs in, {} retained",
        report.cegs_in, report.cegs_out
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// build
// ---------------------------------------------------------------------------

pub fn cmd_build(in_dir: &Path, view: &str, out: &Path) -> Result<(), CliError> {
    let manifest = ManifestBuilder::new("build");
    let view = parse_view(view)?;
    let cegs = parse_ceg_file(in_dir.join("cegs.jsonl"))?;
    let nets = preprocessed_networks(cegs)?;
    let (kg, _) = build_corpus_kg(&nets)?;
    let projected = project(&kg, view);
    export_quads(&projected, out)?;
    let stats = BuildStats::of(&projected);

    let mut manifest = manifest;
    manifest.push_path("in_dir", in_dir);
    manifest.push_path("out", out);
    manifest.push("view", view);
    for (k, v) in stats.as_pairs() {
        manifest.push(k, v);
    }
    manifest.write(&manifest_sibling(out))?;
    println!(
        "build: view {view}, {} entities, {} quads",
        stats.entities, stats.quads
    );
    Ok(())
}

fn manifest_sibling(out: &Path) -> PathBuf {
    let mut name = out
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".to_owned());
    name.push_str(".manifest.tsv");
    out.with_file_name(name)
}

// ---------------------------------------------------------------------------
// split
// ---------------------------------------------------------------------------

#[allow(clippy::too_many_arguments)]
pub fn cmd_split(
    kg_path: Option<&Path>,
    ceg_dir: Option<&Path>,
    strategy: &str,
    task: Option<&str>,
    ratios: &str,
    ceg_ratio: f64,
    view: Option<&str>,
    seed: u64,
    out_dir: &Path,
) -> Result<(), CliError> {
    let manifest = ManifestBuilder::new("split");
    let strategy = SplitStrategy::parse(strategy)
        .ok_or_else(|| CliError::Input(format!("unknown strategy {strategy:?}")))?;
    ensure_dir(out_dir)?;

    let (bundle, report, provenance, view) = match strategy {
        SplitStrategy::Random => {
            let kg_path = kg_path
                .ok_or_else(|| CliError::Input("random strategy requires --kg".into()))?;
            let parts: Vec<&str> = ratios.split(',').collect();
            if parts.len() != 3 {
                return Err(CliError::Input(format!(
                    "expected three comma-separated ratios, got {ratios:?}"
                )));
            }
            let parse_ratio = |s: &str| -> Result<f64, CliError> {
                s.trim()
                    .parse()
                    .map_err(|_| CliError::Input(format!("bad ratio {s:?}")))
            };
            let ratios = (
                parse_ratio(parts[0])?,
                parse_ratio(parts[1])?,
                parse_ratio(parts[2])?,
            );
            let view = parse_view(view.unwrap_or("CTP"))?;
            let kg = import_quads(kg_path)?;
            let kg = project(&kg, view);
            let bundle = random_split(&kg, ratios, seed)?;
            (bundle, None, Provenance::default(), view)
        }
        SplitStrategy::Markov => {
            let ceg_dir = ceg_dir
                .ok_or_else(|| CliError::Input("markov strategy requires --ceg-dir".into()))?;
            let task = task
                .and_then(CausalTask::parse)
                .ok_or_else(|| CliError::Input("markov strategy requires --task prediction|explanation".into()))?;
            let view = parse_view(view.unwrap_or("CTP"))?;
            let path = if ceg_dir.is_dir() {
                ceg_dir.join("cegs.jsonl")
            } else {
                ceg_dir.to_path_buf()
            };
            let cegs = parse_ceg_file(path)?;
            let nets = preprocessed_networks(cegs)?;
            let (bundle, report, provenance) = markov_split(&nets, task, ceg_ratio, seed, view)?;
            (bundle, Some(report), provenance, view)
        }
    };

    let violations = leakage_audit(&bundle, &provenance);
    if !violations.is_empty() {
        for violation in &violations {
            eprintln!("leakage: {violation}");
        }
        return Err(CliError::Validation(format!(
            "{} leakage violation(s)",
            violations.len()
        )));
    }

    write_quad_list(&bundle.train, out_dir.join("train.tsv"))?;
    write_quad_list(&bundle.valid, out_dir.join("valid.tsv"))?;
    write_quad_list(&bundle.test, out_dir.join("test.tsv"))?;
    if strategy == SplitStrategy::Markov {
        write_quad_list(&bundle.support, out_dir.join("support.tsv"))?;
    }
    let pairs = split_manifest_pairs(&bundle, report.as_ref(), view);
    let mut split_manifest = String::new();
    for (k, v) in &pairs {
        split_manifest.push_str(&format!("{k}\t{v}\n"));
    }
    fs::write(out_dir.join("split_manifest.tsv"), split_manifest)?;

    let mut manifest = manifest;
    manifest.push_path("out_dir", out_dir);
    if let Some(kg_path) = kg_path {
        manifest.push_path("kg", kg_path);
    }
    if let Some(ceg_dir) = ceg_dir {
        manifest.push_path("ceg_dir", ceg_dir);
    }
    manifest.push("ceg_ratio", ceg_ratio);
    manifest.push_all(&pairs);
    manifest.write(&out_dir.join("manifest.tsv"))?;
    println!(
        "split: {} train / {} valid / {} test quads",
        bundle.train.len(),
        bundle.valid.len(),
        bundle.test.len()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

pub struct TrainOverrides {
    pub dim: Option<usize>,
    pub epochs: Option<usize>,
    pub eta: Option<usize>,
    pub beta_decay_epochs: Option<usize>,
    pub beta_frozen: Option<f64>,
    pub learning_rate: Option<f64>,
    pub batch_size: Option<usize>,
    pub l2: Option<f64>,
    pub patience: Option<usize>,
    pub seed: Option<u64>,
}

pub fn cmd_train(
    split_dir: &Path,
    model: &str,
    weight_mode: &str,
    config_path: Option<&Path>,
    overrides: &TrainOverrides,
    out: &Path,
) -> Result<(), CliError> {
    let manifest = ManifestBuilder::new("train");
    let model = ModelKind::parse(model)
        .ok_or_else(|| CliError::Input(format!("unknown model {model:?}")))?;
    let weight_mode = WeightMode::parse(weight_mode)
        .ok_or_else(|| CliError::Input(format!("unknown weight mode {weight_mode:?}")))?;

    let (mut config, mut decay_explicit) = config::load_train_config(config_path)?;
    config.weight_mode = weight_mode;
    if let Some(v) = overrides.dim {
        config.dim = v;
    }
    if let Some(v) = overrides.epochs {
        config.epochs = v;
    }
    if let Some(v) = overrides.eta {
        config.negatives_per_positive = v;
    }
    if let Some(v) = overrides.beta_decay_epochs {
        config.structural_influence_decay_epochs = v;
        decay_explicit = true;
    }
    // the default decay horizon tracks the epoch budget: first half
    if !decay_explicit {
        config.structural_influence_decay_epochs = config.epochs / 2;
    }
    if let Some(v) = overrides.beta_frozen {
        config.beta_frozen = Some(v);
    }
    if let Some(v) = overrides.learning_rate {
        config.learning_rate = v;
    }
    if let Some(v) = overrides.batch_size {
        config.batch_size = v;
    }
    if let Some(v) = overrides.l2 {
        config.l2_coefficient = v;
    }
    if let Some(v) = overrides.patience {
        config.early_stop_patience = v;
    }
    if let Some(v) = overrides.seed {
        config.seed = v;
    }

    let train_quads = read_quads(&split_dir.join("train.tsv"))?;
    let valid_quads = read_quads(&split_dir.join("valid.tsv"))?;
    let (state, report) = train(model, &train_quads, &valid_quads, &config)?;
    save_checkpoint(&state, out)?;

    let mut manifest = manifest;
    manifest.push_path("split_dir", split_dir);
    manifest.push_path("out", out);
    manifest.push("model", model);
    manifest.push("weight_mode", weight_mode);
    manifest.push("dim", config.dim);
    manifest.push("learning_rate", config.learning_rate);
    manifest.push("epochs", config.epochs);
    manifest.push("batch_size", config.batch_size);
    manifest.push("eta", config.negatives_per_positive);
    manifest.push(
        "beta_decay_epochs",
        config.structural_influence_decay_epochs,
    );
    if let Some(beta) = config.beta_frozen {
        manifest.push("beta_frozen", beta);
    }
    manifest.push("l2", config.l2_coefficient);
    manifest.push("seed", config.seed);
    manifest.push("patience", config.early_stop_patience);
    manifest.push("epochs_run", report.epochs_run);
    manifest.push("best_epoch", report.best_epoch);
    manifest.push(
        "final_valid_mrr",
        report
            .best_valid_mrr
            .map_or("none".to_owned(), |m| format!("{m:.6}")),
    );
    manifest.push("zero_weight_excluded", report.zero_weight_excluded);
    manifest.write(&manifest_sibling(out))?;
    println!(
        "train: {model} {weight_mode}, {} epochs run, valid MRR {}",
        report.epochs_run,
        report
            .best_valid_mrr
            .map_or("n/a".to_owned(), |m| format!("{m:.4}"))
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

pub fn cmd_eval(
    checkpoint: &Path,
    split_dir: &Path,
    side_policy: &str,
    wide_domain: bool,
    out: &Path,
) -> Result<(), CliError> {
    let manifest = ManifestBuilder::new("eval");
    let policy = SidePolicy::parse(side_policy)
        .ok_or_else(|| CliError::Input(format!("unknown side policy {side_policy:?}")))?;
    let state = load_checkpoint::<f64>(checkpoint)?;

    let train_quads = read_quads(&split_dir.join("train.tsv"))?;
    let valid_quads = read_quads(&split_dir.join("valid.tsv"))?;
    let test_quads = read_quads(&split_dir.join("test.tsv"))?;
    let support_path = split_dir.join("support.tsv");
    let support_quads = if support_path.exists() {
        read_quads(&support_path)?
    } else {
        Vec::new()
    };

    let mut ctx = EvalContext::from_known_quads(
        train_quads
            .iter()
            .chain(&valid_quads)
            .chain(&test_quads)
            .chain(&support_quads),
    );
    ctx.wide_domain = wide_domain;
    let report = evaluate(&state, &test_quads, &ctx, policy)?;
    write_report(&report, out)?;

    let mut manifest = manifest;
    manifest.push_path("checkpoint", checkpoint);
    manifest.push_path("split_dir", split_dir);
    manifest.push_path("out", out);
    manifest.push("side_policy", policy.as_str());
    manifest.push("wide_domain", wide_domain);
    manifest.push("mrr", format!("{:.6}", report.mrr));
    manifest.push("hits1", format!("{:.6}", report.hits1));
    manifest.push("hits3", format!("{:.6}", report.hits3));
    manifest.push("hits10", format!("{:.6}", report.hits10));
    manifest.push("n_queries", report.n_queries);
    manifest.write(&manifest_sibling(out))?;
    println!(
        "eval: MRR {:.4}, Hits@1 {:.4}, Hits@3 {:.4}, Hits@10 {:.4} over {} queries",
        report.mrr, report.hits1, report.hits3, report.hits10, report.n_queries
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// query
// ---------------------------------------------------------------------------

pub fn cmd_query(
    checkpoint: &Path,
    kg_path: &Path,
    mode: &str,
    entity: &str,
    top_k: usize,
) -> Result<(), CliError> {
    let state = load_checkpoint::<f64>(checkpoint)?;
    let kg = import_quads(kg_path)?;
    let type_domain = kg.entities_of_kind(EntityKind::EventType);
    if state.entity_index(entity).is_none() {
        return Err(CliError::Query(format!("unknown entity {entity:?}")));
    }
    let results = match mode {
        "predict" => query_predict(&state, entity, top_k, &type_domain),
        "explain" => query_explain(&state, entity, top_k, &type_domain),
        other => return Err(CliError::Input(format!("unknown query mode {other:?}"))),
    };
    let results = results.map_err(|e| CliError::Query(e.to_string()))?;
    for (name, score) in results {
        println!("{name}\t{score:.6}");
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

#[allow(clippy::too_many_arguments)]
pub fn cmd_synth(
    n_cegs: usize,
    nodes_min: usize,
    nodes_max: usize,
    edge_prob: f64,
    n_types: usize,
    noise: f64,
    seed: u64,
    out: &Path,
) -> Result<(), CliError> {
    let manifest = ManifestBuilder::new("synth");
    let config = causallp_core::SynthConfig::new(
        n_cegs,
        (nodes_min, nodes_max),
        edge_prob,
        n_types,
        noise,
        seed,
    )?;
    let cegs = causallp_core::synth::generate(&config)?;
    write_cegs(&cegs, out)?;

    let mut manifest = manifest;
    manifest.push_path("out", out);
    manifest.push("n_cegs", n_cegs);
    manifest.push("nodes_min", nodes_min);
    manifest.push("nodes_max", nodes_max);
    manifest.push("edge_probability", edge_prob);
    manifest.push("n_event_types", n_types);
    manifest.push("noise_rate", noise);
    manifest.push("seed", seed);
    manifest.write(&manifest_sibling(out))?;
    println!("synth: wrote {} CEGs", cegs.len());
    Ok(())
}

// ---------------------------------------------------------------------------
// grid
// ---------------------------------------------------------------------------

fn grid_threads() -> usize {
    std::env::var("CAUSALLP_THREADS")
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&n: &usize| n >= 1)
        .unwrap_or(1)
}

fn run_grid_cell(
    index: usize,
    cell: &GridCell,
    train_quads: &[Quad],
    valid_quads: &[Quad],
    out_dir: &Path,
) -> Result<(), CliError> {
    let manifest = ManifestBuilder::new("grid-cell");
    let cell_dir = out_dir.join(format!("cell-{index:04}"));
    ensure_dir(&cell_dir)?;
    let mut config = TrainConfig64::default();
    let mut decay_explicit = false;
    for (key, value) in &cell.overrides {
        decay_explicit |= config::is_decay_key(key);
        config::apply_train_key(&mut config, key, value)?;
    }
    if !decay_explicit {
        config.structural_influence_decay_epochs = config.epochs / 2;
    }
    config.weight_mode = cell.weight_mode;
    let (state, report) = train(cell.model, train_quads, valid_quads, &config)?;
    let checkpoint = cell_dir.join("checkpoint.tsv");
    save_checkpoint(&state, &checkpoint)?;

    let mut manifest = manifest;
    manifest.push("cell", index);
    manifest.push("model", cell.model);
    manifest.push("weight_mode", cell.weight_mode);
    for (key, value) in &cell.overrides {
        manifest.push(key, value);
    }
    manifest.push("seed", config.seed);
    manifest.push("epochs_run", report.epochs_run);
    manifest.push(
        "final_valid_mrr",
        report
            .best_valid_mrr
            .map_or("none".to_owned(), |m| format!("{m:.6}")),
    );
    manifest.push_path("checkpoint", &checkpoint);
    manifest.write(&cell_dir.join("manifest.tsv"))?;
    Ok(())
}

pub fn cmd_grid(split_dir: &Path, grid_path: &Path, out_dir: &Path) -> Result<(), CliError> {
    let cells = config::parse_grid(grid_path)?;
    ensure_dir(out_dir)?;
    let train_quads = read_quads(&split_dir.join("train.tsv"))?;
    let valid_quads = read_quads(&split_dir.join("valid.tsv"))?;

    let threads = grid_threads();
    if threads <= 1 {
        for (i, cell) in cells.iter().enumerate() {
            run_grid_cell(i, cell, &train_quads, &valid_quads, out_dir)?;
        }
    } else {
        let jobs: Vec<(usize, &GridCell)> = cells.iter().enumerate().collect();
        let results: Vec<Result<(), CliError>> = std::thread::scope(|scope| {
            let mut handles = Vec::new();
            for chunk in jobs.chunks(jobs.len().div_ceil(threads)) {
                let train_quads = &train_quads;
                let valid_quads = &valid_quads;
                handles.push(scope.spawn(move || {
                    let mut outcomes = Vec::new();
                    for (i, cell) in chunk {
                        outcomes.push(run_grid_cell(*i, cell, train_quads, valid_quads, out_dir));
                    }
                    outcomes
                }));
            }
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("grid worker panicked"))
                .collect()
        });
        for result in results {
            result?;
        }
    }
    println!("grid: {} cells complete", cells.len());
    Ok(())
}
