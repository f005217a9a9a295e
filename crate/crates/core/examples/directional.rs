//! Scratch experiment runner for the weighted-vs-base comparison.

use std::collections::HashSet;

use causallp_core::builder::{build_corpus_kg, project, SubgraphView};
use causallp_core::embed::{train, ModelKind, TrainConfig, WeightMode};
use causallp_core::eval::{evaluate, EvalContext, SidePolicy};
use causallp_core::ingest::preprocess;
use causallp_core::model::{CausalNetwork, Quad, RelationKind};
use causallp_core::split::{markov_split, random_split, CausalTask};
use causallp_core::synth::{generate, SynthConfig};

fn train_config(mode: WeightMode, seed: u64) -> TrainConfig<f64> {
    TrainConfig {
        dim: 32,
        learning_rate: 0.05,
        epochs: 100,
        batch_size: 512,
        negatives_per_positive: 5,
        weight_mode: mode,
        structural_influence_decay_epochs: 50,
        l2_coefficient: 1e-4,
        seed,
        early_stop_patience: 0,
        beta_frozen: None,
    }
}

fn mrr_for(
    state: &causallp_core::embed::EmbeddingState<f64>,
    test: &[Quad],
    known: &[&[Quad]],
) -> f64 {
    let ctx = EvalContext::from_known_quads(known.iter().flat_map(|part| part.iter()));
    evaluate(state, test, &ctx, SidePolicy::PerRelation).map(|r| r.mrr).unwrap_or(0.0)
}

fn main() {
    let started = std::time::Instant::now();
    let config = SynthConfig::bundled();
    let cegs = generate(&config).unwrap();
    let (kept, _) = preprocess(cegs);
    let nets: Vec<CausalNetwork> = kept
        .iter()
        .map(|c| causallp_core::builder::network_from_ceg(c).unwrap())
        .collect();
    let (full_kg, _) = build_corpus_kg(&nets).unwrap();
    let kg_ct = project(&full_kg, SubgraphView::CT);
    println!("corpus: {} CEGs, CT quads {}", nets.len(), kg_ct.len());

    let seeds: Vec<u64> = std::env::args()
        .nth(1)
        .map(|s| s.parse::<u64>().unwrap())
        .map(|n| (1..=n).collect())
        .unwrap_or_else(|| vec![1, 2]);
    let models: Vec<ModelKind> = std::env::args()
        .nth(2)
        .map(|s| {
            s.split(',')
                .map(|m| ModelKind::parse(m).unwrap())
                .collect()
        })
        .unwrap_or_else(|| vec![ModelKind::DistMult, ModelKind::TransE]);

    for model in &models {
        for strategy in ["random", "markov"] {
            for task in [CausalTask::Prediction, CausalTask::Explanation] {
                if strategy == "random" && task == CausalTask::Explanation {
                    // shares trainings with prediction; still evaluate separately below
                }
                let mut base_mrrs = Vec::new();
                let mut weighted_mrrs = Vec::new();
                for &seed in &seeds {
                    for (mode, out) in [
                        (WeightMode::Base, &mut base_mrrs),
                        (WeightMode::Weighted, &mut weighted_mrrs),
                    ] {
                        let config = train_config(mode, seed);
                        let mrr = match strategy {
                            "random" => {
                                let bundle = random_split(&kg_ct, (0.8, 0.1, 0.1), seed).unwrap();
                                let (state, _) =
                                    train(*model, &bundle.train, &bundle.valid, &config).unwrap();
                                let rel = task.query_relation();
                                let test: Vec<Quad> = bundle
                                    .test
                                    .iter()
                                    .filter(|q| q.relation == rel)
                                    .cloned()
                                    .collect();
                                mrr_for(
                                    &state,
                                    &test,
                                    &[&bundle.train, &bundle.valid, &bundle.test],
                                )
                            }
                            _ => {
                                let (bundle, _, _) =
                                    markov_split(&nets, task, 0.8, seed, SubgraphView::CT).unwrap();
                                let (state, _) =
                                    train(*model, &bundle.train, &bundle.valid, &config).unwrap();
                                mrr_for(
                                    &state,
                                    &bundle.test,
                                    &[&bundle.train, &bundle.valid, &bundle.test, &bundle.support],
                                )
                            }
                        };
                        out.push(mrr);
                    }
                }
                let med = |v: &mut Vec<f64>| {
                    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
                    v[v.len() / 2]
                };
                let base = med(&mut base_mrrs);
                let weighted = med(&mut weighted_mrrs);
                println!(
                    "{model} {strategy} {task}: base {base:.4} weighted {weighted:.4} {}",
                    if weighted > base { "W>B" } else { "" }
                );
            }
        }
    }
    println!("elapsed: {:.1}s", started.elapsed().as_secs_f64());
    let _ = HashSet::<RelationKind>::new();
}
