//! Property tests for the preprocessing pipeline: idempotence, retained-CEG
//! invariants, and the cycle-breaking bounds.

use causallp_core::ingest::{break_cycles, preprocess};
use causallp_core::model::{Ceg, CegEdge, CegNode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Descriptions spanning all extraction outcomes.
const DESCRIPTIONS: [&str; 7] = [
    "the red cube moves",
    "the blue sphere rolls",
    "the gray cube bumps the brown cube",
    "the yellow ball hits the blue cylinder",
    "the red ball collides with the blue sphere and hits the yellow cylinder", // composite
    "nothing recognizable happens",                                            // unparseable
    "the green cylinder slides",
];

fn random_ceg<R: Rng>(rng: &mut R, id: usize) -> Ceg {
    let n = rng.gen_range(1..=7);
    let nodes: Vec<CegNode> = (0..n)
        .map(|i| CegNode {
            id: format!("n{i}"),
            description: DESCRIPTIONS[rng.gen_range(0..DESCRIPTIONS.len())].to_owned(),
            event: None,
        })
        .collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            // cycles and self-loops allowed
            if rng.gen_bool(0.25) {
                edges.push(CegEdge {
                    src: format!("n{i}"),
                    dst: format!("n{j}"),
                    score: rng.gen_range(1..=5),
                });
            }
        }
    }
    Ceg {
        video_id: format!("v{id:03}"),
        nodes,
        edges,
    }
}

#[test]
fn preprocess_is_idempotent_on_random_corpora() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for round in 0..30 {
        let cegs: Vec<Ceg> = (0..10).map(|i| random_ceg(&mut rng, round * 10 + i)).collect();
        let (once, _) = preprocess(cegs);
        let (twice, report) = preprocess(once.clone());
        assert_eq!(once, twice, "round {round}");
        assert_eq!(report.edges_dropped_score1, 0);
        assert_eq!(report.edges_dropped_cycle, 0);
        assert_eq!(report.nodes_dropped_composite, 0);
        assert_eq!(report.cegs_dropped_empty + report.cegs_dropped_shallow, 0);
    }
}

#[test]
fn retained_cegs_satisfy_all_pipeline_invariants() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let cegs: Vec<Ceg> = (0..200).map(|i| random_ceg(&mut rng, i)).collect();
    let (kept, report) = preprocess(cegs);
    assert_eq!(
        report.cegs_out,
        report.cegs_in - report.cegs_dropped_empty - report.cegs_dropped_shallow
    );
    for ceg in &kept {
        assert!(ceg.is_acyclic());
        assert!(!ceg.edges.is_empty());
        assert!(ceg.max_depth().unwrap() >= 2);
        assert!(ceg.edges.iter().all(|e| e.score >= 2));
        for node in &ceg.nodes {
            let event = node.event.as_ref().expect("retained nodes carry events");
            assert_eq!(
                event.participants.len(),
                event.arity.participant_count(),
                "arity consistency for {:?}",
                node.description
            );
        }
    }
}

#[test]
fn break_cycles_is_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    for i in 0..100 {
        let ceg = random_ceg(&mut rng, i);
        let (out_a, removed_a) = break_cycles(ceg.clone());
        let (out_b, removed_b) = break_cycles(ceg);
        assert_eq!(out_a, out_b);
        assert_eq!(removed_a, removed_b);
        assert!(out_a.is_acyclic());
    }
}

/// Minimum feedback arc set via the ordering characterization: the optimum
/// equals the minimum, over all node orderings, of backward-edge counts.
fn min_feedback_arc_set(n: usize, edges: &[(usize, usize)]) -> usize {
    fn permutations(items: Vec<usize>) -> Vec<Vec<usize>> {
        if items.len() <= 1 {
            return vec![items];
        }
        let mut out = Vec::new();
        for i in 0..items.len() {
            let mut rest = items.clone();
            let head = rest.remove(i);
            for mut tail in permutations(rest) {
                tail.insert(0, head);
                out.push(tail);
            }
        }
        out
    }
    let mut best = usize::MAX;
    for order in permutations((0..n).collect()) {
        let mut position = vec![0usize; n];
        for (pos, &node) in order.iter().enumerate() {
            position[node] = pos;
        }
        let backward = edges
            .iter()
            .filter(|&&(u, v)| position[v] <= position[u])
            .count();
        best = best.min(backward);
    }
    best
}

#[test]
fn cycle_breaking_respects_the_feedback_arc_lower_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..60 {
        let n = rng.gen_range(2..=6);
        let mut edges = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i != j && rng.gen_bool(0.3) {
                    edges.push((i, j));
                }
            }
        }
        let ceg = Ceg {
            video_id: "fas".to_owned(),
            nodes: (0..n)
                .map(|i| CegNode {
                    id: format!("n{i}"),
                    description: String::new(),
                    event: None,
                })
                .collect(),
            edges: edges
                .iter()
                .map(|&(u, v)| CegEdge {
                    src: format!("n{u}"),
                    dst: format!("n{v}"),
                    score: 3,
                })
                .collect(),
        };
        let optimum = min_feedback_arc_set(n, &edges);
        let (_, removed) = break_cycles(ceg);
        assert!(
            removed.len() >= optimum,
            "DFS removed {} edges, below the optimum {optimum}",
            removed.len()
        );
    }
}
