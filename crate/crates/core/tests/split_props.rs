//! Property tests for the splitters: part disjointness, Markov masking
//! soundness, determinism, and task swap symmetry.

mod common;

use std::collections::HashSet;

use causallp_core::builder::{build_corpus_kg, SubgraphView};
use causallp_core::model::TripleKey;
use causallp_core::split::{
    leakage_audit, markov_split, random_split, CausalTask, Provenance, SplitBundle,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn assert_disjoint(bundle: &SplitBundle) {
    let train = SplitBundle::part_keys(&bundle.train);
    let valid = SplitBundle::part_keys(&bundle.valid);
    let test = SplitBundle::part_keys(&bundle.test);
    assert!(train.is_disjoint(&valid));
    assert!(train.is_disjoint(&test));
    assert!(valid.is_disjoint(&test));
}

#[test]
fn random_split_parts_are_disjoint_for_any_seed() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for round in 0..15 {
        let nets = common::random_corpus(&mut rng, 3, 7);
        let (kg, _) = build_corpus_kg(&nets).unwrap();
        let seed = rng.gen();
        let bundle = random_split(&kg, (0.8, 0.1, 0.1), seed).unwrap();
        assert_disjoint(&bundle);
        assert_eq!(
            bundle.train.len() + bundle.valid.len() + bundle.test.len(),
            kg.len(),
            "round {round}"
        );
        assert!(leakage_audit(&bundle, &Provenance::default()).is_empty());
    }
}

#[test]
fn markov_split_never_leaks_on_random_corpora() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for round in 0..60 {
        let n_cegs = rng.gen_range(2..=5);
        let nets = common::random_corpus(&mut rng, n_cegs, 8);
        let seed = rng.gen();
        for task in [CausalTask::Prediction, CausalTask::Explanation] {
            let (bundle, report, provenance) =
                markov_split(&nets, task, 0.5, seed, SubgraphView::CTP).unwrap();
            assert_disjoint(&bundle);
            let violations = leakage_audit(&bundle, &provenance);
            assert!(
                violations.is_empty(),
                "round {round} {task}: {violations:?}"
            );
            assert!(report.test_query_quads == bundle.test.len());
            assert!(report.test_query_quads <= 4 * report.crossing_edges.max(1));

            // every surviving query head appears in some train quad
            let train_entities: HashSet<&str> = bundle
                .train
                .iter()
                .flat_map(|q| [q.head.name(), q.tail.name()])
                .collect();
            for quad in &bundle.test {
                assert!(train_entities.contains(quad.head.name()));
            }
        }
    }
}

#[test]
fn markov_split_is_deterministic_and_swap_symmetric() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let nets = common::random_corpus(&mut rng, 4, 7);
        let seed = rng.gen();
        let (pa, ra, prov_a) =
            markov_split(&nets, CausalTask::Prediction, 0.5, seed, SubgraphView::CTP).unwrap();
        let (pb, rb, prov_b) =
            markov_split(&nets, CausalTask::Prediction, 0.5, seed, SubgraphView::CTP).unwrap();
        assert_eq!(ra, rb);
        assert_eq!(pa.train, pb.train);
        assert_eq!(pa.test, pb.test);

        // same seed, other task: identical pools and crossing set
        let (_, re, prov_e) =
            markov_split(&nets, CausalTask::Explanation, 0.5, seed, SubgraphView::CTP).unwrap();
        assert_eq!(prov_a.crossing, prov_e.crossing);
        assert_eq!(ra.cegs_train, re.cegs_train);
        assert_eq!(ra.crossing_edges, re.crossing_edges);
        let _ = prov_b;
    }
}

#[test]
fn crossing_edges_connect_depth_le1_to_depth_ge2() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let nets = common::random_corpus(&mut rng, 3, 8);
        let seed = rng.gen();
        let (_, _, provenance) =
            markov_split(&nets, CausalTask::Prediction, 0.0, seed, SubgraphView::CTP).unwrap();
        for edge in &provenance.crossing {
            let net = nets.iter().find(|n| n.scene() == edge.scene).unwrap();
            let depths = net.node_depths().unwrap();
            assert!(depths[&edge.src] <= 1);
            assert!(depths[&edge.dst] >= 2);
        }
    }
}

#[test]
fn masked_quads_never_reach_training_under_any_view() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for view in [SubgraphView::C, SubgraphView::CT, SubgraphView::CTP] {
        let nets = common::random_corpus(&mut rng, 4, 8);
        let seed = rng.gen();
        let (bundle, _, provenance) =
            markov_split(&nets, CausalTask::Explanation, 0.25, seed, view).unwrap();
        let trained: HashSet<TripleKey> = bundle
            .train
            .iter()
            .chain(&bundle.valid)
            .map(|q| q.key())
            .collect();
        for key in &trained {
            if let Some(origins) = provenance.origins.origins(key) {
                assert!(origins.iter().all(|o| !provenance.crossing.contains(o)));
            }
        }
        assert!(leakage_audit(&bundle, &provenance).is_empty());
    }
}
